#include <future>
#include <fstream>
#include <set>

#include "agglomer/csv.hpp"
#include "agglomer/error.hpp"
#include "agglomer/pipeline.hpp"

namespace agglomer {

namespace {

using Columns = std::vector<std::string>;
using FixedEffects = std::vector<std::vector<std::string>>;

const FixedEffects kMainEffects = {{"broad_category", "region", "period"}, {"category", "period"}};

RegressionSpec logit(const std::string& response, const Columns& covariates, FixedEffects fe,
                     Transform transform = Transform::Identity, const std::set<std::string>& transformed = {}) {
  RegressionSpec spec;
  spec.family = Family::Logistic;
  spec.response = response;
  for (const auto& c : covariates) spec.covariates.push_back({c, transformed.count(c) ? transform : Transform::Identity});
  spec.fixed_effects = std::move(fe);
  spec.clusters = {"region", "period"};
  return spec;
}

Columns concat(std::initializer_list<Columns> parts) {
  Columns out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

Columns without(const Columns& all, const std::set<std::string>& drop) {
  Columns out;
  for (const auto& c : all) {
    if (!drop.count(c)) out.push_back(c);
  }
  return out;
}

const Columns kControls = {"ubiquity", "rho_M", "rho_omega", "R_births"};
const Columns kMigration = {"M_immi", "M_emi"};
const Columns kDensities = {"omega_immi", "omega_emi", "omega_births"};

std::vector<AmeRequest> headline_ames() {
  return {{"M_immi", AmeKind::Binary01}, {"omega_immi", AmeKind::SdIncrease}};
}

SuiteDefinition table1() {
  SuiteDefinition s{"table1", {}};
  const std::vector<Columns> density_sets = {{}, {"omega_immi"}, {"omega_emi"}, {"omega_births"}, kDensities};
  int number = 1;
  for (const std::string response : {"entry", "exit"}) {
    for (std::size_t j = 0; j < density_sets.size(); ++j) {
      SuiteColumn c;
      c.label = "(" + std::to_string(number++) + ") " + response;
      c.spec = logit(response, concat({kMigration, density_sets[j], kControls}), kMainEffects);
      if (j + 1 == density_sets.size()) c.ames = headline_ames();
      s.columns.push_back(std::move(c));
    }
  }
  return s;
}

SuiteDefinition ladder(const std::string& name, const std::string& response, const std::string& first_last,
                       const DataTable& panel) {
  SuiteDefinition s{name, {}};
  const Columns full = concat({kMigration, kDensities, kControls});
  const Columns extended = concat({full, {"diversity", "log_pop"}});
  auto add = [&](std::string label, RegressionSpec spec, PanelFilter filter = {}, std::vector<AmeRequest> ames = {}) {
    SuiteColumn c;
    c.label = std::move(label);
    c.spec = std::move(spec);
    c.filter = std::move(filter);
    c.ames = std::move(ames);
    s.columns.push_back(std::move(c));
  };
  add("main", logit(response, full, kMainEffects), {}, headline_ames());
  add("fe region-period + category", logit(response, full, {{"region", "period"}, {"category"}}));
  add("fe period + region + category", logit(response, extended, {{"period"}, {"region"}, {"category"}}));
  add("fe period + region", logit(response, extended, {{"period"}, {"region"}}));
  add("fe period", logit(response, extended, {{"period"}}));

  RegressionSpec interacted = logit(response, full, kMainEffects);
  interacted.interactions = {{"rho_M", "period"}, {"rho_omega", "period"}};
  add("spatial lags x period", interacted);

  PanelFilter early;
  early.centuries = std::make_pair(kFirstCentury + 1, 19);
  add("centuries 11-19", logit(response, full, kMainEffects), early);
  PanelFilter late;
  late.centuries = std::make_pair(20, 20);
  RegressionSpec single_period = logit(response, full, {{"broad_category", "region"}, {"category"}});
  single_period.clusters = {"region"};
  add("century 20", single_period, late);

  add("first/last birth", logit(first_last, full, kMainEffects));

  RegressionSpec with_product = logit(response, full, kMainEffects);
  with_product.interactions = {{"omega_immi", "omega_births"}};
  add("omega_immi x omega_births", with_product);

  std::set<std::string> broad;
  for (const auto& b : panel.labels("broad_category")) broad.insert(b);
  for (const auto& b : broad) {
    PanelFilter f;
    f.broad_categories = {b};
    add("broad category " + b, logit(response, full, kMainEffects), f);
  }
  PanelFilter small, large;
  small.city_size = CitySize::Small;
  large.city_size = CitySize::Large;
  add("small cities", logit(response, full, kMainEffects), small);
  add("large cities", logit(response, full, kMainEffects), large);
  return s;
}

SuiteDefinition decomposed() {
  SuiteDefinition s{"decomposed", {}};
  const Columns counts = {"N_immi", "N_immi_rowsum", "N_immi_colsum", "N_emi", "N_emi_rowsum", "N_emi_colsum",
                          "births_rowsum_t", "births_colsum_t"};
  const std::set<std::string> transformed(counts.begin(), counts.end());
  const Columns all = concat({counts, kDensities, {"diversity", "ubiquity", "rho_M", "rho_omega", "log_pop"}});
  // Region-period effects absorb every region-by-century term.
  const Columns within = without(all, {"N_immi_rowsum", "N_emi_rowsum", "births_rowsum_t", "diversity", "log_pop"});
  const std::vector<std::pair<Columns, FixedEffects>> ladder = {
      {all, {{"period"}}},
      {all, {{"period"}, {"region"}}},
      {all, {{"period"}, {"region"}, {"category"}}},
      {within, {{"region", "period"}, {"category"}}},
      {within, kMainEffects},
  };
  int number = 1;
  for (const std::string response : {"entry", "exit"}) {
    for (std::size_t j = 0; j < ladder.size(); ++j) {
      SuiteColumn c;
      c.label = "(" + std::to_string(number++) + ") " + response;
      c.spec = logit(response, ladder[j].first, ladder[j].second, Transform::Asinh, transformed);
      if (j == 3) c.count_ames = {{"N_immi", CountDelta::PlusOne}, {"N_immi", CountDelta::PlusOnePercent}};
      s.columns.push_back(std::move(c));
    }
  }
  return s;
}

std::string kind_name(AmeKind k) {
  switch (k) {
    case AmeKind::Binary01: return "binary01";
    case AmeKind::SdIncrease: return "sd_increase";
    case AmeKind::Unit: return "unit";
  }
  return "?";
}

ColumnResult run_column(const SuiteColumn& column, const DataTable& panel) {
  ColumnResult out;
  out.column = column;
  try {
    const bool filtered = column.filter.centuries || !column.filter.broad_categories.empty() || column.filter.city_size;
    const DataTable data = filtered ? subset(panel, column.filter) : panel;
    out.design = build_design(data, column.spec);
    out.fit = fit(*out.design);
    for (const auto& a : column.ames) out.ames.push_back(average_marginal_effect(*out.design, *out.fit, a.variable, a.kind));
    for (const auto& a : column.count_ames) {
      out.count_ames.push_back(counterfactual_count_ame(*out.design, *out.fit, a.variable, a.delta));
    }
  } catch (const Error& e) {
    out.error = e.what();
    out.fit.reset();
  }
  return out;
}

nlohmann::ordered_json filter_json(const PanelFilter& f) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  if (f.centuries) j["centuries"] = {f.centuries->first, f.centuries->second};
  if (!f.broad_categories.empty()) j["broad_categories"] = f.broad_categories;
  if (f.city_size) j["city_size"] = *f.city_size == CitySize::Small ? "small" : "large";
  return j;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"table1", "entries-ladder", "exits-ladder", "decomposed"};
  return names;
}

SuiteDefinition suite_definition(const std::string& name, const DataTable& panel) {
  if (name == "table1") return table1();
  if (name == "entries-ladder") return ladder(name, "entry", "entry2", panel);
  if (name == "exits-ladder") return ladder(name, "exit", "exit2", panel);
  if (name == "decomposed") return decomposed();
  throw validation_error("UnknownSuite", "unknown suite '" + name + "'");
}

SuiteReport run_suite(const SuiteDefinition& suite, const Panel& panel, const MeasureOptions& options) {
  SuiteReport report;
  report.name = suite.name;
  report.options = options;
  report.panel_metadata = panel.metadata;
  std::vector<std::future<ColumnResult>> pending;
  for (const auto& column : suite.columns) {
    pending.push_back(std::async(std::launch::async, run_column, std::cref(column), std::cref(panel.table)));
  }
  for (auto& p : pending) report.columns.push_back(p.get());
  return report;
}

SuiteReport run_suite(const Corpus& corpus, const std::string& name, const MeasureOptions& options) {
  const Panel panel = assemble_panel(corpus, options);
  return run_suite(suite_definition(name, panel.table), panel, options);
}

nlohmann::ordered_json SuiteReport::to_json() const {
  nlohmann::ordered_json j;
  j["suite"] = name;
  j["expectation"] = agglomer::to_string(options.expectation);
  j["proximity"] = agglomer::to_string(options.proximity);
  j["density_self_term"] = options.density.exclude_self ? "excluded" : "included";
  j["pseudo_r2_variant"] = "mcfadden";
  j["cluster_correction"] = "G/(G-1) per clustering dimension";
  nlohmann::ordered_json panel = panel_metadata;
  panel.erase("expectation_models");
  j["panel"] = std::move(panel);
  auto& cols = j["columns"] = nlohmann::ordered_json::array();
  for (const auto& c : columns) {
    nlohmann::ordered_json col;
    col["label"] = c.column.label;
    col["filter"] = filter_json(c.column.filter);
    col["spec"] = agglomer::to_json(c.column.spec);
    if (!c.error.empty()) {
      col["error"] = c.error;
    } else {
      nlohmann::ordered_json fit = agglomer::to_json(*c.fit, *c.design);
      fit.erase("spec");
      fit.erase("fixed_effects");
      col["fit"] = std::move(fit);
      auto& ames = col["ames"] = nlohmann::ordered_json::array();
      for (std::size_t a = 0; a < c.ames.size(); ++a) {
        ames.push_back({{"variable", c.ames[a].variable},
                        {"kind", kind_name(c.column.ames[a].kind)},
                        {"step", c.ames[a].step},
                        {"effect", c.ames[a].effect},
                        {"percentage_points", c.ames[a].percentage_points()}});
      }
      auto& count_ames = col["count_ames"] = nlohmann::ordered_json::array();
      for (std::size_t a = 0; a < c.count_ames.size(); ++a) {
        count_ames.push_back({{"variable", c.count_ames[a].variable},
                              {"delta", c.column.count_ames[a].delta == CountDelta::PlusOne ? "+1" : "+1%"},
                              {"effect", c.count_ames[a].effect},
                              {"percentage_points", c.count_ames[a].percentage_points()}});
      }
    }
    cols.push_back(std::move(col));
  }
  return j;
}

void SuiteReport::write_coefficients_csv(std::ostream& out) const {
  csv::write_row(out, {"suite", "column", "response", "term", "estimate", "std_error", "z", "p_value", "stars", "n",
                       "pseudo_r2", "bic"});
  for (const auto& c : columns) {
    if (!c.fit) continue;
    const auto se = c.fit->std_errors();
    for (std::size_t k = 0; k < c.fit->names.size(); ++k) {
      const double b = c.fit->coefficients(static_cast<Eigen::Index>(k));
      const double s = se(static_cast<Eigen::Index>(k));
      const double p = normal_p_value(b / s);
      csv::write_row(out, {name, c.column.label, c.column.spec.response, c.fit->names[k], csv::format_double(b),
                           csv::format_double(s), csv::format_double(b / s), csv::format_double(p), stars(p),
                           std::to_string(c.fit->n_used), csv::format_double(c.fit->pseudo_r2),
                           csv::format_double(c.fit->bic)});
    }
  }
}

void write_report(const SuiteReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / (report.name + ".json"), std::ios::binary);
    if (!out) throw validation_error("WriteFailed", "cannot write to " + dir.string());
    out << report.to_json().dump(2) << '\n';
  }
  std::ofstream out(dir / (report.name + "_coefficients.csv"), std::ios::binary);
  if (!out) throw validation_error("WriteFailed", "cannot write to " + dir.string());
  report.write_coefficients_csv(out);
}

}  // namespace agglomer
