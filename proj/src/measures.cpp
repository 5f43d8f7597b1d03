#include <algorithm>
#include <cmath>

#include "agglomer/error.hpp"
#include "agglomer/pipeline.hpp"

namespace agglomer {

Expectation parse_expectation(const std::string& name) {
  if (name == "naive") return Expectation::Naive;
  if (name == "negbin") return Expectation::NegBin;
  throw validation_error("UnknownExpectation", "expectation must be naive or negbin, got '" + name + "'");
}

ProximityMode parse_proximity(const std::string& name) {
  if (name == "separate") return ProximityMode::Separate;
  if (name == "joint") return ProximityMode::Joint;
  throw validation_error("UnknownProximity", "proximity must be separate or joint, got '" + name + "'");
}

std::string to_string(Expectation e) { return e == Expectation::Naive ? "naive" : "negbin"; }
std::string to_string(ProximityMode p) { return p == ProximityMode::Separate ? "separate" : "joint"; }

int RoleMeasures::row(const std::string& region) const {
  auto it = row_index.find(region);
  return it == row_index.end() ? -1 : it->second;
}

int RoleMeasures::col(const std::string& occupation) const {
  auto it = col_index.find(occupation);
  return it == col_index.end() ? -1 : it->second;
}

const RoleMeasures* MeasureSet::find(Century t, Role role) const {
  auto it = slices.find({t.value, static_cast<int>(role)});
  return it == slices.end() ? nullptr : &it->second;
}

const RoleMeasures* MeasureSet::find_joint(Century t) const {
  auto it = joint.find(t.value);
  return it == joint.end() ? nullptr : &it->second;
}

Eigen::MatrixXd births_share_ratio(const CountTensor& counts, Century t) {
  const Eigen::MatrixXd n = counts.matrix(t, Role::Births);
  const double total = n.sum();
  if (!(total > 0.0)) return Eigen::MatrixXd::Zero(n.rows(), n.cols());
  return rca_ratio(n, expected_naive(n));
}

ExpectationModel fit_expectation_model(const CountTensor& counts, Role role, const std::map<int, KeptIndex>& kept_by_century) {
  std::vector<double> y, lagged, share;
  std::vector<std::string> region, occupation, period;
  std::vector<std::tuple<int, int, int>> keys;
  for (const auto& [t, kept] : kept_by_century) {
    if (t <= kFirstCentury) continue;
    const Eigen::MatrixXd now = counts.matrix(Century{t}, role);
    const Eigen::MatrixXd before = counts.matrix(Century{t - 1}, role);
    const Eigen::MatrixXd s = births_share_ratio(counts, Century{t - 1});
    for (int i : kept.regions) {
      for (int k : kept.occupations) {
        y.push_back(now(i, k));
        lagged.push_back(before(i, k));
        share.push_back(s(i, k));
        region.push_back(counts.regions()[static_cast<std::size_t>(i)]);
        occupation.push_back(counts.occupations()[static_cast<std::size_t>(k)]);
        period.push_back("c" + std::to_string(t));
        keys.emplace_back(t, i, k);
      }
    }
  }
  if (y.empty()) throw validation_error("MissingAdjacentCentury", "expectation model needs two consecutive centuries");

  DataTable table;
  table.add_numeric("N", std::move(y));
  table.add_numeric("N_lag", std::move(lagged));
  table.add_numeric("S_births_lag", std::move(share));
  table.add_labels("region", std::move(region));
  table.add_labels("occupation", std::move(occupation));
  table.add_labels("period", std::move(period));

  RegressionSpec spec;
  spec.family = Family::NegBin;
  spec.response = "N";
  spec.covariates = {{"N_lag", Transform::Identity}, {"S_births_lag", Transform::Identity}};
  spec.fixed_effects = {{"region", "period"}, {"occupation", "period"}};

  ExpectationModel model;
  model.role = role;
  model.design = build_design(table, spec);
  model.fit = fit(model.design);
  for (std::size_t r = 0; r < model.design.rows.size(); ++r) {
    model.fitted.emplace(keys[model.design.rows[r]], model.fit.fitted(static_cast<Eigen::Index>(r)));
  }
  return model;
}

namespace {

void index_labels(RoleMeasures& m) {
  for (std::size_t a = 0; a < m.slice.regions.size(); ++a) m.row_index.emplace(m.slice.regions[a], static_cast<int>(a));
  for (std::size_t b = 0; b < m.slice.occupations.size(); ++b) m.col_index.emplace(m.slice.occupations[b], static_cast<int>(b));
}

std::vector<int> positions(const std::vector<std::string>& all, const std::vector<std::string>& wanted) {
  std::vector<int> out;
  for (const auto& w : wanted) {
    out.push_back(static_cast<int>(std::lower_bound(all.begin(), all.end(), w) - all.begin()));
  }
  return out;
}

// Proximity over `occupations` taken from a proximity matrix defined on
// another occupation list; pairs outside it get 0.
Eigen::MatrixXd align_proximity(const RoleMeasures& source, const std::vector<std::string>& occupations) {
  const auto n = static_cast<Eigen::Index>(occupations.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  std::vector<int> at(occupations.size());
  for (std::size_t a = 0; a < occupations.size(); ++a) at[a] = source.col(occupations[a]);
  for (Eigen::Index a = 0; a < n; ++a) {
    if (at[static_cast<std::size_t>(a)] < 0) continue;
    for (Eigen::Index b = 0; b < n; ++b) {
      if (at[static_cast<std::size_t>(b)] < 0) continue;
      out(a, b) = source.proximity(at[static_cast<std::size_t>(a)], at[static_cast<std::size_t>(b)]);
    }
  }
  return out;
}

}  // namespace

MeasureSet compute_measures(const Corpus&, const CountTensor& counts, const MeasureOptions& options) {
  MeasureSet set;
  set.options = options;
  constexpr Role kRoles[] = {Role::Births, Role::Deaths, Role::Immi, Role::Emi, Role::Locals};

  std::map<int, std::map<int, KeptIndex>> kept;  // role -> century -> kept
  for (Role role : kRoles) {
    for (int t = kFirstCentury; t <= kLastCentury; ++t) {
      if (counts.total(Century{t}, role) == 0) continue;
      try {
        kept[static_cast<int>(role)].emplace(t, filter_sparse(counts, Century{t}, role));
      } catch (const Error& e) {
        if (e.code() != "EmptyAfterFilter") throw;
        set.notes.push_back(e.what());
      }
    }
  }

  if (options.expectation == Expectation::NegBin) {
    for (Role role : {Role::Births, Role::Immi, Role::Emi}) {
      auto it = kept.find(static_cast<int>(role));
      if (it == kept.end()) continue;
      try {
        set.expectation_models.push_back(fit_expectation_model(counts, role, it->second));
      } catch (const Error& e) {
        if (e.code() != "MissingAdjacentCentury") throw;
        set.notes.push_back(std::string(role_name(role)) + ": " + e.what());
      }
    }
    set.notes.push_back("first century uses the naive expectation (no lagged counts)");
  }

  for (const auto& [role_value, by_century] : kept) {
    const Role role = static_cast<Role>(role_value);
    const ExpectationModel* model = nullptr;
    for (const auto& m : set.expectation_models) {
      if (m.role == role) model = &m;
    }
    for (const auto& [t, index] : by_century) {
      RoleMeasures m;
      m.century = Century{t};
      m.role = role;
      m.slice = make_slice(counts, Century{t}, role, index);
      m.expected = expected_naive(m.slice.counts);
      if (model && t > kFirstCentury) {
        for (std::size_t a = 0; a < index.regions.size(); ++a) {
          for (std::size_t b = 0; b < index.occupations.size(); ++b) {
            auto f = model->fitted.find({t, index.regions[a], index.occupations[b]});
            if (f != model->fitted.end()) m.expected(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = f->second;
          }
        }
        m.model_expectation = true;
      }
      m.ratio = rca_ratio(m.slice.counts, m.expected);
      m.specialization = binarize(m.ratio);
      m.proximity = proximity(m.specialization);
      index_labels(m);
      set.slices.emplace(std::make_pair(t, role_value), std::move(m));
    }
  }

  // Joint births + deaths specialization on the common index set.
  for (int t = kFirstCentury; t <= kLastCentury; ++t) {
    const RoleMeasures* b = set.find(Century{t}, Role::Births);
    const RoleMeasures* d = set.find(Century{t}, Role::Deaths);
    if (!b || !d) continue;
    KeptIndex common;
    std::vector<std::string> regions, occupations;
    std::set_intersection(b->slice.regions.begin(), b->slice.regions.end(), d->slice.regions.begin(), d->slice.regions.end(),
                          std::back_inserter(regions));
    std::set_intersection(b->slice.occupations.begin(), b->slice.occupations.end(), d->slice.occupations.begin(),
                          d->slice.occupations.end(), std::back_inserter(occupations));
    if (regions.empty() || occupations.empty()) continue;
    common.regions = positions(counts.regions(), regions);
    common.occupations = positions(counts.occupations(), occupations);
    RoleMeasures j;
    j.century = Century{t};
    j.role = Role::Births;
    const CountSlice births = make_slice(counts, Century{t}, Role::Births, common);
    const CountSlice deaths = make_slice(counts, Century{t}, Role::Deaths, common);
    j.slice = births;
    j.slice.counts = births.counts + deaths.counts;
    if (births.counts.sum() <= 0.0 || deaths.counts.sum() <= 0.0) continue;
    j.expected = expected_naive(births.counts) + expected_naive(deaths.counts);
    j.ratio = joint_ratio(births.counts, deaths.counts);
    j.specialization = binarize(j.ratio);
    j.proximity = proximity(j.specialization);
    index_labels(j);
    j.density = relatedness_density(j.specialization, j.proximity, options.density);
    set.joint.emplace(t, std::move(j));
  }

  for (auto& [key, m] : set.slices) {
    if (options.proximity == ProximityMode::Joint) {
      const RoleMeasures* j = set.find_joint(m.century);
      if (j) {
        m.proximity = align_proximity(*j, m.slice.occupations);
      } else {
        m.proximity = Eigen::MatrixXd::Zero(m.specialization.cols(), m.specialization.cols());
        set.notes.push_back("century " + std::to_string(m.century.value) + ": no joint proximity available");
      }
    }
    m.density = relatedness_density(m.specialization, m.proximity, options.density);
  }
  return set;
}

}  // namespace agglomer
