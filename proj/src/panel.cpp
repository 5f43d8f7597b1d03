#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "agglomer/error.hpp"
#include "agglomer/pipeline.hpp"
#include "agglomer/spatial.hpp"

namespace agglomer {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string period_label(int t) { return "c" + std::to_string(t); }

struct Lags {
  Eigen::MatrixXd rho_m;
  Eigen::MatrixXd rho_omega;
  bool ok = false;
};

Lags spatial_lags(const Corpus& corpus, const RoleMeasures& births, std::vector<std::string>& notes) {
  Lags lags;
  std::vector<RegionRecord> records;
  for (const auto& code : births.slice.regions) records.push_back(corpus.regions.at(static_cast<std::size_t>(corpus.regions.index_of(code))));
  try {
    const WeightMatrix w = inverse_distance_weights(records);
    if (w.coincident_pairs > 0) {
      notes.push_back("century " + std::to_string(births.century.value) + ": " + std::to_string(w.coincident_pairs) +
                      " coincident centroid pairs floored at 1 km");
    }
    lags.rho_m = spatial_lag(w.weights, births.specialization.cells.cast<double>());
    lags.rho_omega = spatial_lag(w.weights, births.density.omega);
    lags.ok = true;
  } catch (const Error& e) {
    if (e.code() != "IsolatedRegion") throw;
    notes.push_back("century " + std::to_string(births.century.value) + ": " + e.what());
  }
  return lags;
}

double cell(const RoleMeasures* m, const std::string& region, const std::string& occupation,
            const std::function<double(const RoleMeasures&, int, int)>& get) {
  if (!m) return kNaN;
  const int i = m->row(region);
  const int k = m->col(occupation);
  if (i < 0 || k < 0) return kNaN;
  return get(*m, i, k);
}

}  // namespace

Panel assemble_panel(const Corpus& corpus, const MeasureOptions& options) {
  const CountTensor counts = tabulate_counts(corpus);
  const MeasureSet measures = compute_measures(corpus, counts, options);
  return assemble_panel(corpus, counts, measures);
}

Panel assemble_panel(const Corpus& corpus, const CountTensor& counts, const MeasureSet& measures) {
  std::map<std::string, double> population;
  for (const auto& p : corpus.population) population[p.region_code + "|" + std::to_string(p.century.value)] = p.population;

  std::vector<std::string> region, occupation, category, broad, period;
  std::map<std::string, std::vector<double>> num;
  const std::vector<std::string> numeric_columns = {
      "century", "entry", "exit", "entry2", "exit2", "M_immi", "M_emi", "omega_immi", "omega_emi", "omega_births",
      "R_births", "M_births", "ubiquity", "diversity", "rho_M", "rho_omega", "population", "log_pop", "N_immi",
      "N_immi_rowsum", "N_immi_colsum", "N_emi", "N_emi_rowsum", "N_emi_colsum", "N_births", "births_rowsum_t",
      "births_colsum_t"};
  for (const auto& c : numeric_columns) num[c];

  std::vector<std::string> notes = measures.notes;
  bool any_transition = false;
  for (int t = kFirstCentury + 1; t <= kLastCentury; ++t) {
    const RoleMeasures* before = measures.find(Century{t - 1}, Role::Births);
    const RoleMeasures* now = measures.find(Century{t}, Role::Births);
    if (!before || !now) continue;
    any_transition = true;
    const RoleMeasures* immi = measures.find(Century{t - 1}, Role::Immi);
    const RoleMeasures* emi = measures.find(Century{t - 1}, Role::Emi);
    const Lags lags = spatial_lags(corpus, *before, notes);

    const Eigen::MatrixXd births_prev = counts.matrix(Century{t - 1}, Role::Births);
    const Eigen::MatrixXd births_now = counts.matrix(Century{t}, Role::Births);
    const Eigen::MatrixXd immi_prev = counts.matrix(Century{t - 1}, Role::Immi);
    const Eigen::MatrixXd emi_prev = counts.matrix(Century{t - 1}, Role::Emi);
    const Eigen::VectorXd immi_rows = immi_prev.rowwise().sum(), emi_rows = emi_prev.rowwise().sum(),
                          births_rows = births_now.rowwise().sum();
    const Eigen::RowVectorXd immi_cols = immi_prev.colwise().sum(), emi_cols = emi_prev.colwise().sum(),
                             births_cols = births_now.colwise().sum();

    for (const auto& r : before->slice.regions) {
      const int i1 = now->row(r);
      if (i1 < 0) continue;
      const int i0 = before->row(r);
      const int ri = corpus.regions.index_of(r);
      for (const auto& o : before->slice.occupations) {
        const int k1 = now->col(o);
        if (k1 < 0) continue;
        const int k0 = before->col(o);
        const int ok = corpus.taxonomy.index_of(o);
        const auto& tax = corpus.taxonomy.at(o);

        region.push_back(r);
        occupation.push_back(o);
        category.push_back(tax.category);
        broad.push_back(tax.broad_category);
        period.push_back(period_label(t));
        num["century"].push_back(t);

        const int m0 = before->specialization.cells(i0, k0);
        const int m1 = now->specialization.cells(i1, k1);
        num["entry"].push_back(m0 == 0 ? static_cast<double>(m1) : kNaN);
        num["exit"].push_back(m0 == 1 ? static_cast<double>(1 - m1) : kNaN);
        const double n0 = births_prev(ri, ok), n1 = births_now(ri, ok);
        num["entry2"].push_back(n0 == 0.0 ? (n1 > 0.0 ? 1.0 : 0.0) : kNaN);
        num["exit2"].push_back(n0 > 0.0 ? (n1 == 0.0 ? 1.0 : 0.0) : kNaN);

        auto m_of = [](const RoleMeasures& m, int i, int k) { return static_cast<double>(m.specialization.cells(i, k)); };
        auto omega_of = [](const RoleMeasures& m, int i, int k) { return m.density.omega(i, k); };
        num["M_immi"].push_back(cell(immi, r, o, m_of));
        num["M_emi"].push_back(cell(emi, r, o, m_of));
        num["omega_immi"].push_back(cell(immi, r, o, omega_of));
        num["omega_emi"].push_back(cell(emi, r, o, omega_of));
        num["omega_births"].push_back(before->density.omega(i0, k0));
        num["R_births"].push_back(before->ratio(i0, k0));
        num["M_births"].push_back(m0);
        num["ubiquity"].push_back(before->specialization.ubiquity(k0));
        num["diversity"].push_back(before->specialization.diversity(i0));
        num["rho_M"].push_back(lags.ok ? lags.rho_m(i0, k0) : kNaN);
        num["rho_omega"].push_back(lags.ok ? lags.rho_omega(i0, k0) : kNaN);

        auto pop = population.find(r + "|" + std::to_string(t));
        const double p = pop == population.end() ? kNaN : pop->second;
        num["population"].push_back(p);
        num["log_pop"].push_back(p > 0.0 ? std::log(p) : kNaN);

        num["N_immi"].push_back(immi_prev(ri, ok));
        num["N_immi_rowsum"].push_back(immi_rows(ri));
        num["N_immi_colsum"].push_back(immi_cols(ok));
        num["N_emi"].push_back(emi_prev(ri, ok));
        num["N_emi_rowsum"].push_back(emi_rows(ri));
        num["N_emi_colsum"].push_back(emi_cols(ok));
        num["N_births"].push_back(n0);
        num["births_rowsum_t"].push_back(births_rows(ri));
        num["births_colsum_t"].push_back(births_cols(ok));
      }
    }
  }
  if (!any_transition) {
    throw validation_error("MissingAdjacentCentury", "the corpus has no two consecutive centuries with surviving births");
  }

  Panel panel;
  panel.table.add_labels("region", std::move(region));
  panel.table.add_labels("occupation", std::move(occupation));
  panel.table.add_labels("category", std::move(category));
  panel.table.add_labels("broad_category", std::move(broad));
  panel.table.add_numeric("century", std::move(num["century"]));
  panel.table.add_labels("period", std::move(period));
  for (const auto& c : numeric_columns) {
    if (c != "century") panel.table.add_numeric(c, std::move(num[c]));
  }

  auto& meta = panel.metadata;
  meta["rows"] = panel.table.rows();
  meta["expectation"] = to_string(measures.options.expectation);
  meta["proximity"] = to_string(measures.options.proximity);
  meta["density_self_term"] = measures.options.density.exclude_self ? "excluded" : "included";
  nlohmann::ordered_json timing;
  for (const auto& c : {"region", "occupation", "category", "broad_category", "century", "period"}) timing[c] = "key";
  for (const auto& c : {"entry", "exit", "entry2", "exit2"}) timing[c] = "t (outcome)";
  for (const auto& c : {"M_immi", "M_emi", "omega_immi", "omega_emi", "omega_births", "R_births", "M_births", "ubiquity",
                        "diversity", "rho_M", "rho_omega", "N_immi", "N_immi_rowsum", "N_immi_colsum", "N_emi",
                        "N_emi_rowsum", "N_emi_colsum", "N_births"}) {
    timing[c] = "t-1";
  }
  // Population is measured at the start of the outcome century; the births
  // margins are the contemporaneous terms of the decomposed ratio.
  for (const auto& c : {"population", "log_pop", "births_rowsum_t", "births_colsum_t"}) timing[c] = "t";
  meta["timing"] = std::move(timing);
  nlohmann::ordered_json models = nlohmann::ordered_json::array();
  for (const auto& m : measures.expectation_models) {
    models.push_back({{"role", role_name(m.role)}, {"fit", to_json(m.fit, m.design)}});
  }
  meta["expectation_models"] = std::move(models);
  meta["notes"] = notes;
  return panel;
}

DataTable subset(const DataTable& panel, const PanelFilter& filter) {
  const std::size_t n = panel.rows();
  std::vector<bool> keep(n, true);
  if (filter.centuries) {
    const auto& century = panel.numeric("century");
    for (std::size_t r = 0; r < n; ++r) {
      keep[r] = keep[r] && century[r] >= filter.centuries->first && century[r] <= filter.centuries->second;
    }
  }
  if (!filter.broad_categories.empty()) {
    const auto broad = panel.labels("broad_category");
    for (std::size_t r = 0; r < n; ++r) {
      keep[r] = keep[r] && std::find(filter.broad_categories.begin(), filter.broad_categories.end(), broad[r]) !=
                               filter.broad_categories.end();
    }
  }
  if (filter.city_size) {
    const auto& century = panel.numeric("century");
    const auto& pop = panel.numeric("population");
    const auto regions = panel.labels("region");
    // Median over distinct regions present in each century.
    std::map<double, std::map<std::string, double>> by_century;
    for (std::size_t r = 0; r < n; ++r) {
      if (!std::isnan(pop[r])) by_century[century[r]].emplace(regions[r], pop[r]);
    }
    std::map<double, double> median;
    for (const auto& [t, values] : by_century) {
      std::vector<double> v;
      for (const auto& [code, p] : values) v.push_back(p);
      std::sort(v.begin(), v.end());
      const std::size_t m = v.size();
      median[t] = m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (std::isnan(pop[r])) {
        keep[r] = false;
        continue;
      }
      const double med = median.at(century[r]);
      keep[r] = keep[r] && (*filter.city_size == CitySize::Small ? pop[r] <= med : pop[r] > med);
    }
  }
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < n; ++r) {
    if (keep[r]) rows.push_back(r);
  }
  if (rows.empty()) throw validation_error("EmptySubset", "no panel rows match the subset filter");
  return panel.select(rows);
}

}  // namespace agglomer
