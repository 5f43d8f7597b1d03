#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "agglomer/econometrics.hpp"
#include "agglomer/error.hpp"
#include "normal_equations.hpp"

namespace agglomer {

std::string to_string(Family family) {
  switch (family) {
    case Family::Logistic: return "logistic";
    case Family::NegBin: return "negbin";
    case Family::Gaussian: return "gaussian";
  }
  return "?";
}

std::string to_string(Transform transform) {
  switch (transform) {
    case Transform::Identity: return "identity";
    case Transform::Asinh: return "asinh";
    case Transform::Log: return "log";
  }
  return "?";
}

Family parse_family(const std::string& name) {
  if (name == "logistic") return Family::Logistic;
  if (name == "negbin") return Family::NegBin;
  if (name == "gaussian" || name == "ols") return Family::Gaussian;
  throw validation_error("UnknownFamily", "unknown model family '" + name + "'");
}

Transform parse_transform(const std::string& name) {
  if (name == "identity" || name.empty()) return Transform::Identity;
  if (name == "asinh") return Transform::Asinh;
  if (name == "log") return Transform::Log;
  throw validation_error("UnknownTransform", "unknown transform '" + name + "'");
}

nlohmann::ordered_json to_json(const RegressionSpec& spec) {
  nlohmann::ordered_json j;
  j["family"] = to_string(spec.family);
  j["response"] = spec.response;
  j["covariates"] = nlohmann::ordered_json::array();
  for (const auto& c : spec.covariates) j["covariates"].push_back({{"col", c.column}, {"transform", to_string(c.transform)}});
  j["interactions"] = nlohmann::ordered_json::array();
  for (const auto& pair : spec.interactions) j["interactions"].push_back({pair[0], pair[1]});
  j["fixed_effects"] = spec.fixed_effects;
  j["clusters"] = spec.clusters;
  return j;
}

RegressionSpec spec_from_json(const nlohmann::json& j) {
  try {
    RegressionSpec spec;
    spec.family = parse_family(j.at("family").get<std::string>());
    spec.response = j.at("response").get<std::string>();
    for (const auto& c : j.value("covariates", nlohmann::json::array())) {
      if (c.is_string()) {
        spec.covariates.push_back({c.get<std::string>(), Transform::Identity});
      } else {
        spec.covariates.push_back({c.at("col").get<std::string>(), parse_transform(c.value("transform", "identity"))});
      }
    }
    for (const auto& pair : j.value("interactions", nlohmann::json::array())) {
      if (!pair.is_array() || pair.size() != 2) throw validation_error("InvalidSpec", "interactions must be pairs");
      spec.interactions.push_back({pair[0].get<std::string>(), pair[1].get<std::string>()});
    }
    for (const auto& fe : j.value("fixed_effects", nlohmann::json::array())) {
      if (fe.is_string()) {
        spec.fixed_effects.push_back({fe.get<std::string>()});
      } else {
        spec.fixed_effects.push_back(fe.get<std::vector<std::string>>());
      }
    }
    spec.clusters = j.value("clusters", std::vector<std::string>{});
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw validation_error("InvalidSpec", e.what());
  }
}

// --- Design accessors -------------------------------------------------------

std::size_t Design::n_params() const {
  std::size_t p = n_dense();
  for (const auto& f : factors) p += f.parameters();
  return p;
}

std::size_t Design::factor_offset(std::size_t f) const {
  std::size_t off = n_dense();
  for (std::size_t g = 0; g < f; ++g) off += factors[g].parameters();
  return off;
}

std::size_t Design::n_estimated() const {
  return static_cast<std::size_t>(std::count(aliased.begin(), aliased.end(), false));
}

Eigen::VectorXd Design::linear_predictor(const Eigen::VectorXd& params) const { return linear_predictor(params, dense); }

Eigen::VectorXd Design::linear_predictor(const Eigen::VectorXd& params, const Eigen::MatrixXd& dense_override) const {
  Eigen::VectorXd eta = dense_override * params.head(static_cast<Eigen::Index>(n_dense()));
  for (std::size_t f = 0; f < factors.size(); ++f) {
    const std::size_t off = factor_offset(f);
    const auto& idx = factors[f].index;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] > 0) eta(static_cast<Eigen::Index>(i)) += params(static_cast<Eigen::Index>(off + static_cast<std::size_t>(idx[i]) - 1));
    }
  }
  return eta;
}

namespace {

double apply_transform(Transform t, double x) {
  switch (t) {
    case Transform::Identity: return x;
    case Transform::Asinh: return std::asinh(x);
    case Transform::Log: return x > 0.0 ? std::log(x) : std::numeric_limits<double>::quiet_NaN();
  }
  return x;
}

std::string transformed_name(const std::string& column, Transform t) {
  return t == Transform::Identity ? column : to_string(t) + "(" + column + ")";
}

double term_value(const Design& d, const Term& term, Eigen::Index row, const Eigen::MatrixXd& raw) {
  if (term.source >= 0) return apply_transform(term.transform, raw(row, term.source));
  return d.label_codes[static_cast<std::size_t>(term.label_slot)][static_cast<std::size_t>(row)] == term.level ? 1.0 : 0.0;
}

void fill_dense(const Design& d, const Eigen::MatrixXd& raw, Eigen::MatrixXd& out) {
  const auto n = raw.rows();
  out.resize(n, static_cast<Eigen::Index>(d.columns.size()));
  for (std::size_t c = 0; c < d.columns.size(); ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double v = 1.0;
      for (const auto& term : d.columns[c].terms) v *= term_value(d, term, i, raw);
      out(i, static_cast<Eigen::Index>(c)) = v;
    }
  }
}

std::string join_key(const std::vector<const DataTable::Labels*>& cols, std::size_t row) {
  std::string key;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (c) key.push_back('|');
    key += (*cols[c])[row];
  }
  return key;
}

}  // namespace

Eigen::MatrixXd Design::dense_with(std::size_t source, const std::function<double(double)>& perturb) const {
  Eigen::MatrixXd shifted = raw;
  for (Eigen::Index i = 0; i < shifted.rows(); ++i) {
    shifted(i, static_cast<Eigen::Index>(source)) = perturb(shifted(i, static_cast<Eigen::Index>(source)));
  }
  Eigen::MatrixXd out;
  fill_dense(*this, shifted, out);
  return out;
}

int Design::source_index(const std::string& name) const {
  for (std::size_t s = 0; s < sources.size(); ++s) {
    if (sources[s] == name) return static_cast<int>(s);
  }
  return -1;
}

// --- build_design -----------------------------------------------------------

Design build_design(const DataTable& panel, const RegressionSpec& spec) {
  Design d;
  d.spec = spec;
  d.n_input = panel.rows();

  if (!panel.has(spec.response)) throw validation_error("UnknownColumn", "response column '" + spec.response + "' not found");
  if (!panel.is_numeric(spec.response)) throw validation_error("NotNumeric", "response column '" + spec.response + "' is not numeric");
  std::map<std::string, Transform> covariate_transform;
  for (const auto& c : spec.covariates) {
    if (c.column == spec.response) throw validation_error("InvalidSpec", "response '" + spec.response + "' listed as a covariate");
    if (!panel.has(c.column)) throw validation_error("UnknownColumn", "covariate column '" + c.column + "' not found");
    if (!panel.is_numeric(c.column)) throw validation_error("NotNumeric", "covariate column '" + c.column + "' is not numeric");
    covariate_transform.emplace(c.column, c.transform);
  }

  // Numeric sources: covariates, then numeric interaction members.
  auto add_source = [&](const std::string& name) {
    if (std::find(d.sources.begin(), d.sources.end(), name) == d.sources.end()) d.sources.push_back(name);
  };
  for (const auto& c : spec.covariates) add_source(c.column);
  std::vector<std::string> label_members;
  for (const auto& pair : spec.interactions) {
    for (const auto& member : pair) {
      if (!panel.has(member)) throw validation_error("UnknownColumn", "interaction column '" + member + "' not found");
      if (member == spec.response) throw validation_error("InvalidSpec", "response used in an interaction");
      if (panel.is_numeric(member)) {
        add_source(member);
      } else if (std::find(label_members.begin(), label_members.end(), member) == label_members.end()) {
        label_members.push_back(member);
      }
    }
  }
  for (const auto& fe : spec.fixed_effects) {
    if (fe.empty()) throw validation_error("InvalidSpec", "empty fixed-effect tuple");
    for (const auto& col : fe) {
      if (!panel.has(col)) throw validation_error("UnknownColumn", "fixed-effect column '" + col + "' not found");
    }
  }
  for (const auto& col : spec.clusters) {
    if (!panel.has(col)) throw validation_error("UnknownColumn", "cluster column '" + col + "' not found");
  }

  const auto& y_all = panel.numeric(spec.response);
  std::vector<const DataTable::Numeric*> source_cols;
  for (const auto& s : d.sources) source_cols.push_back(&panel.numeric(s));
  std::vector<DataTable::Labels> label_cols;
  for (const auto& m : label_members) label_cols.push_back(panel.labels(m));
  std::vector<std::vector<DataTable::Labels>> fe_cols;
  for (const auto& fe : spec.fixed_effects) {
    std::vector<DataTable::Labels> cols;
    for (const auto& col : fe) cols.push_back(panel.labels(col));
    fe_cols.push_back(std::move(cols));
  }
  std::vector<DataTable::Labels> cluster_cols;
  for (const auto& col : spec.clusters) cluster_cols.push_back(panel.labels(col));

  // Complete cases.
  std::vector<std::size_t> active;
  for (std::size_t r = 0; r < panel.rows(); ++r) {
    bool ok = !std::isnan(y_all[r]);
    for (std::size_t s = 0; ok && s < d.sources.size(); ++s) {
      const double v = (*source_cols[s])[r];
      auto it = covariate_transform.find(d.sources[s]);
      const Transform t = it == covariate_transform.end() ? Transform::Identity : it->second;
      ok = std::isfinite(apply_transform(t, v));
    }
    for (std::size_t m = 0; ok && m < label_cols.size(); ++m) ok = !label_cols[m][r].empty();
    for (std::size_t f = 0; ok && f < fe_cols.size(); ++f) {
      for (const auto& col : fe_cols[f]) ok = ok && !col[r].empty();
    }
    for (std::size_t c = 0; ok && c < cluster_cols.size(); ++c) ok = !cluster_cols[c][r].empty();
    if (ok) active.push_back(r);
  }
  d.n_dropped_missing = panel.rows() - active.size();

  for (auto r : active) {
    const double y = y_all[r];
    if (spec.family == Family::Logistic && y != 0.0 && y != 1.0) {
      throw validation_error("InvalidResponse", "logistic response must be 0 or 1");
    }
    if (spec.family == Family::NegBin && (y < 0.0 || y != std::floor(y))) {
      throw validation_error("InvalidResponse", "count response must be a non-negative integer");
    }
  }

  // Drop fixed-effect cells without response variation until nothing changes.
  if (spec.family != Family::Gaussian && !spec.fixed_effects.empty()) {
    std::vector<std::vector<std::string>> keys(fe_cols.size());
    for (std::size_t f = 0; f < fe_cols.size(); ++f) {
      std::vector<const DataTable::Labels*> ptrs;
      for (const auto& col : fe_cols[f]) ptrs.push_back(&col);
      keys[f].resize(panel.rows());
      for (auto r : active) keys[f][r] = join_key(ptrs, r);
    }
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t f = 0; f < keys.size(); ++f) {
        std::map<std::string, std::pair<double, double>> range;
        for (auto r : active) {
          auto [it, inserted] = range.emplace(keys[f][r], std::make_pair(y_all[r], y_all[r]));
          if (!inserted) {
            it->second.first = std::min(it->second.first, y_all[r]);
            it->second.second = std::max(it->second.second, y_all[r]);
          }
        }
        std::vector<std::size_t> kept;
        for (auto r : active) {
          const auto& [lo, hi] = range.at(keys[f][r]);
          const bool degenerate = spec.family == Family::Logistic ? lo == hi : hi == 0.0;
          if (!degenerate) kept.push_back(r);
        }
        if (kept.size() != active.size()) {
          d.n_dropped_separation += active.size() - kept.size();
          active = std::move(kept);
          changed = true;
        }
      }
    }
  }

  const auto n = static_cast<Eigen::Index>(active.size());
  if (n < 2) throw validation_error("InsufficientRows", "fewer than 2 usable rows for estimation");
  d.rows = active;

  d.response.resize(n);
  d.raw.resize(n, static_cast<Eigen::Index>(d.sources.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto r = active[static_cast<std::size_t>(i)];
    d.response(i) = y_all[r];
    for (std::size_t s = 0; s < d.sources.size(); ++s) d.raw(i, static_cast<Eigen::Index>(s)) = (*source_cols[s])[r];
  }

  // Label sources used by interactions: levels sorted, first is reference.
  std::vector<std::vector<std::string>> label_levels;
  for (std::size_t m = 0; m < label_members.size(); ++m) {
    std::set<std::string> levels;
    for (auto r : active) levels.insert(label_cols[m][r]);
    std::vector<std::string> sorted(levels.begin(), levels.end());
    std::vector<int> codes;
    codes.reserve(active.size());
    for (auto r : active) {
      codes.push_back(static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), label_cols[m][r]) - sorted.begin()));
    }
    d.label_sources.push_back(label_members[m]);
    d.label_codes.push_back(std::move(codes));
    label_levels.push_back(std::move(sorted));
  }

  // Dense columns: intercept, covariates, interactions.
  d.columns.push_back({"(Intercept)", {}});
  for (const auto& c : spec.covariates) {
    d.columns.push_back({transformed_name(c.column, c.transform), {Term{d.source_index(c.column), c.transform, -1, -1}}});
  }
  for (const auto& pair : spec.interactions) {
    std::vector<std::vector<std::pair<std::string, Term>>> alternatives;
    for (const auto& member : pair) {
      std::vector<std::pair<std::string, Term>> alts;
      const int s = d.source_index(member);
      if (s >= 0 && panel.is_numeric(member)) {
        auto it = covariate_transform.find(member);
        const Transform t = it == covariate_transform.end() ? Transform::Identity : it->second;
        alts.emplace_back(transformed_name(member, t), Term{s, t, -1, -1});
      } else {
        const auto slot = static_cast<int>(std::find(d.label_sources.begin(), d.label_sources.end(), member) - d.label_sources.begin());
        const auto& levels = label_levels[static_cast<std::size_t>(slot)];
        for (std::size_t l = 1; l < levels.size(); ++l) {
          alts.emplace_back(member + "=" + levels[l], Term{-1, Transform::Identity, slot, static_cast<int>(l)});
        }
      }
      alternatives.push_back(std::move(alts));
    }
    for (const auto& [name_a, term_a] : alternatives[0]) {
      for (const auto& [name_b, term_b] : alternatives[1]) d.columns.push_back({name_a + ":" + name_b, {term_a, term_b}});
    }
  }
  fill_dense(d, d.raw, d.dense);

  for (std::size_t f = 0; f < fe_cols.size(); ++f) {
    std::vector<const DataTable::Labels*> ptrs;
    for (const auto& col : fe_cols[f]) ptrs.push_back(&col);
    FactorBlock block;
    for (std::size_t c = 0; c < spec.fixed_effects[f].size(); ++c) {
      if (c) block.name += "*";
      block.name += spec.fixed_effects[f][c];
    }
    std::vector<std::string> keys;
    keys.reserve(active.size());
    for (auto r : active) keys.push_back(join_key(ptrs, r));
    std::set<std::string> levels(keys.begin(), keys.end());
    block.levels.assign(levels.begin(), levels.end());
    block.index.reserve(keys.size());
    for (const auto& k : keys) {
      const int level = static_cast<int>(std::lower_bound(block.levels.begin(), block.levels.end(), k) - block.levels.begin());
      block.index.push_back(level == 0 ? -1 : level);
    }
    d.factors.push_back(std::move(block));
  }

  for (const auto& col : cluster_cols) {
    std::map<std::string, int> ids;
    std::vector<int> out;
    out.reserve(active.size());
    for (auto r : active) ids.emplace(col[r], 0);
    int next = 0;
    for (auto& [label, id] : ids) id = next++;
    for (auto r : active) out.push_back(ids.at(col[r]));
    d.clusters.push_back(std::move(out));
  }

  d.aliased.assign(d.n_params(), false);
  d.aliased = detail::NormalEquations::detect_aliasing(d);
  bool identified = false;
  for (std::size_t j = 0; j < d.n_dense(); ++j) identified = identified || !d.aliased[j];
  bool covariate_identified = d.n_dense() == 1;
  for (std::size_t j = 1; j < d.n_dense(); ++j) covariate_identified = covariate_identified || !d.aliased[j];
  if (!identified || !covariate_identified) {
    throw validation_error("RankDeficient", "no identifiable non-fixed-effect coefficient after dropping rows");
  }
  return d;
}

}  // namespace agglomer
