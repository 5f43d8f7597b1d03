#include <fstream>
#include <iostream>
#include <set>

#include <CLI11.hpp>

#include "agglomer/concentration.hpp"
#include "agglomer/csv.hpp"
#include "agglomer/error.hpp"
#include "agglomer/pipeline.hpp"
#include "agglomer/relatedness.hpp"
#include "agglomer/spatial.hpp"
#include "agglomer/specialization.hpp"
#include "agglomer/svg.hpp"
#include "agglomer/synthetic.hpp"

using namespace agglomer;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitEstimation = 3;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw validation_error("WriteFailed", "cannot write '" + path + "'");
  return out;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("FileNotFound", "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw validation_error("InvalidJson", path + ": " + e.what());
  }
}

Century century_arg(int t) {
  if (t < kFirstCentury || t > kLastCentury) throw validation_error("OutOfRange", "century must be in 11..20");
  return Century{t};
}

struct MeasureArgs {
  std::string expectation = "naive";
  std::string proximity = "separate";
  bool exclude_self = false;

  void attach(CLI::App* app, bool with_proximity = true) {
    app->add_option("--expectation", expectation, "naive|negbin")->check(CLI::IsMember({"naive", "negbin"}));
    if (with_proximity) {
      app->add_option("--proximity", proximity, "separate|joint")->check(CLI::IsMember({"separate", "joint"}));
    }
    app->add_flag("--exclude-self", exclude_self, "Drop the own-activity term from relatedness density");
  }

  MeasureOptions options() const {
    MeasureOptions o;
    o.expectation = parse_expectation(expectation);
    o.proximity = parse_proximity(proximity);
    o.density.exclude_self = exclude_self;
    return o;
  }
};

const RoleMeasures& role_slice(const MeasureSet& m, Century t, const std::string& role) {
  const RoleMeasures* r = role == "joint" ? m.find_joint(t) : m.find(t, parse_role(role));
  if (!r) throw validation_error("EmptyAfterFilter", "no surviving " + role + " slice in century " + std::to_string(t.value));
  return *r;
}

void write_heatmap(const std::string& path, const RoleMeasures& r) {
  auto out = open_out(path);
  svg::heatmap(out, r.specialization, r.slice.regions, r.slice.occupations,
               nested_sort(r.specialization, r.slice.regions, r.slice.occupations));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Migration, specialization and relatedness analytics"};
  app.require_subcommand(1);

  // ingest
  IngestPaths paths;
  bool geocode = false;
  std::string ingest_out, out_format = "binary";
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate inputs and write a corpus file");
  ingest_cmd->add_option("--biographies", paths.biographies)->required();
  ingest_cmd->add_option("--taxonomy", paths.taxonomy)->required();
  ingest_cmd->add_option("--regions", paths.regions)->required();
  ingest_cmd->add_option("--population", paths.population);
  ingest_cmd->add_flag("--geocode-nearest", geocode, "Resolve coordinates to the nearest region centroid");
  ingest_cmd->add_option("--out", ingest_out)->required();
  ingest_cmd->add_option("--out-format", out_format)->check(CLI::IsMember({"binary", "json"}));

  std::string corpus_path, out_path;
  int century = 0;

  auto* entropy_cmd = app.add_subcommand("entropy", "Entropy and effective places per century");
  entropy_cmd->add_option("--corpus", corpus_path)->required();
  entropy_cmd->add_option("--out", out_path)->required();

  std::string role = "births", svg_path;
  MeasureArgs measure_args;
  auto* specialize_cmd = app.add_subcommand("specialize", "Ratios and binary specialization for one slice");
  specialize_cmd->add_option("--corpus", corpus_path)->required();
  specialize_cmd->add_option("--role", role)->check(CLI::IsMember({"births", "deaths", "immi", "emi", "locals", "joint"}));
  specialize_cmd->add_option("--century", century)->required();
  specialize_cmd->add_option("--out", out_path)->required();
  specialize_cmd->add_option("--svg", svg_path, "Nested-sorted heatmap");
  measure_args.attach(specialize_cmd, false);

  std::string densities_path, locals_path;
  double min_edge = 0.0;
  auto* relate_cmd = app.add_subcommand("relate", "Proximity and relatedness density for one slice");
  relate_cmd->add_option("--corpus", corpus_path)->required();
  relate_cmd->add_option("--role", role)->check(CLI::IsMember({"births", "deaths", "immi", "emi", "locals", "joint"}));
  relate_cmd->add_option("--century", century)->required();
  relate_cmd->add_option("--out", out_path)->required();
  relate_cmd->add_option("--densities", densities_path);
  relate_cmd->add_option("--svg", svg_path, "Proximity network");
  relate_cmd->add_option("--min-edge", min_edge, "Smallest proximity drawn in the network");
  relate_cmd->add_option("--locals-proxy", locals_path, "Write the locals-proxy regression to this JSON file");
  measure_args.attach(relate_cmd);

  auto* spatial_cmd = app.add_subcommand("spatial", "Spatial lags of births specialization and density");
  spatial_cmd->add_option("--corpus", corpus_path)->required();
  spatial_cmd->add_option("--century", century)->required();
  spatial_cmd->add_option("--out", out_path)->required();
  measure_args.attach(spatial_cmd);

  std::string panel_path, spec_path, metadata_path;
  auto* fit_cmd = app.add_subcommand("fit", "Estimate one model on a panel");
  fit_cmd->add_option("--panel", panel_path)->required();
  fit_cmd->add_option("--spec", spec_path)->required();
  fit_cmd->add_option("--out", out_path)->required();

  auto* panel_cmd = app.add_subcommand("panel", "Assemble the regression panel");
  panel_cmd->add_option("--corpus", corpus_path)->required();
  panel_cmd->add_option("--out", out_path)->required();
  panel_cmd->add_option("--metadata", metadata_path, "Column timing and notes as JSON");
  measure_args.attach(panel_cmd);

  std::string suite_name;
  auto* suite_cmd = app.add_subcommand("suite", "Run a specification ladder");
  suite_cmd->add_option("--corpus", corpus_path)->required();
  suite_cmd->add_option("--name", suite_name)->required()->check(CLI::IsMember(suite_names()));
  suite_cmd->add_option("--out", out_path)->required();
  measure_args.attach(suite_cmd);

  std::string fit_path, variable, kind = "binary01";
  auto* margins_cmd = app.add_subcommand("margins", "Average marginal effect from a saved fit");
  margins_cmd->add_option("--fit", fit_path)->required();
  margins_cmd->add_option("--panel", panel_path)->required();
  margins_cmd->add_option("--var", variable)->required();
  margins_cmd->add_option("--kind", kind)->check(CLI::IsMember({"binary01", "sd_increase", "unit", "plus1", "plus1pct"}));
  margins_cmd->add_option("--out", out_path, "Write JSON here instead of stdout");

  SyntheticOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic corpus with a planted entry effect");
  synth_cmd->add_option("--seed", synth.seed);
  synth_cmd->add_option("--slope", synth.entry_slope);
  synth_cmd->add_option("--regions", synth.regions);
  synth_cmd->add_option("--occupations", synth.occupations);
  synth_cmd->add_option("--out", out_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*ingest_cmd) {
      const Corpus corpus = ingest_files(paths, IngestOptions{geocode});
      auto out = open_out(ingest_out);
      if (out_format == "json") {
        save_json(corpus, out);
      } else {
        save_binary(corpus, out);
      }
      std::cerr << "ingested " << corpus.biographies.size() << " biographies (" << corpus.report.dropped_companion
                << " companion, " << corpus.report.excluded_missing_birth_year << " missing birth year, "
                << corpus.report.excluded_out_of_range << " out of range)\n";
    } else if (*entropy_cmd) {
      const Corpus corpus = load_corpus_file(corpus_path);
      auto out = open_out(out_path);
      csv::write_row(out, {"century", "H_births", "E_births", "H_deaths", "E_deaths"});
      for (const auto& row : concentration_series(tabulate_counts(corpus))) {
        csv::write_row(out, {std::to_string(row.century.value), csv::format_double(row.entropy_births),
                             csv::format_double(row.effective_births), csv::format_double(row.entropy_deaths),
                             csv::format_double(row.effective_deaths)});
      }
    } else if (*specialize_cmd) {
      const Century t = century_arg(century);
      const Corpus corpus = load_corpus_file(corpus_path);
      const MeasureSet m = compute_measures(corpus, tabulate_counts(corpus), measure_args.options());
      const RoleMeasures& r = role_slice(m, t, role);
      auto out = open_out(out_path);
      csv::write_row(out, {"region", "occupation", "N", "Nhat", "R", "M"});
      for (Eigen::Index i = 0; i < r.ratio.rows(); ++i) {
        for (Eigen::Index k = 0; k < r.ratio.cols(); ++k) {
          csv::write_row(out, {r.slice.regions[static_cast<std::size_t>(i)], r.slice.occupations[static_cast<std::size_t>(k)],
                               csv::format_double(r.slice.counts(i, k)), csv::format_double(r.expected(i, k)),
                               csv::format_double(r.ratio(i, k)), std::to_string(r.specialization.cells(i, k))});
        }
      }
      if (!svg_path.empty()) write_heatmap(svg_path, r);
    } else if (*relate_cmd) {
      const Century t = century_arg(century);
      const Corpus corpus = load_corpus_file(corpus_path);
      const CountTensor counts = tabulate_counts(corpus);
      const MeasureSet m = compute_measures(corpus, counts, measure_args.options());
      const RoleMeasures& r = role_slice(m, t, role);
      {
        auto out = open_out(out_path);
        csv::write_row(out, {"occupation_a", "occupation_b", "phi"});
        for (Eigen::Index a = 0; a < r.proximity.rows(); ++a) {
          for (Eigen::Index b = 0; b < r.proximity.cols(); ++b) {
            csv::write_row(out, {r.slice.occupations[static_cast<std::size_t>(a)], r.slice.occupations[static_cast<std::size_t>(b)],
                                 csv::format_double(r.proximity(a, b))});
          }
        }
      }
      if (!densities_path.empty()) {
        auto out = open_out(densities_path);
        std::set<int> isolated(r.density.isolated_activities.begin(), r.density.isolated_activities.end());
        csv::write_row(out, {"region", "occupation", "M", "omega", "isolated"});
        for (Eigen::Index i = 0; i < r.density.omega.rows(); ++i) {
          for (Eigen::Index k = 0; k < r.density.omega.cols(); ++k) {
            csv::write_row(out, {r.slice.regions[static_cast<std::size_t>(i)], r.slice.occupations[static_cast<std::size_t>(k)],
                                 std::to_string(r.specialization.cells(i, k)), csv::format_double(r.density.omega(i, k)),
                                 isolated.count(static_cast<int>(k)) ? "1" : "0"});
          }
        }
      }
      if (!svg_path.empty()) {
        std::vector<double> sizes;
        for (Eigen::Index k = 0; k < r.slice.counts.cols(); ++k) sizes.push_back(r.slice.counts.col(k).sum());
        auto out = open_out(svg_path);
        svg::network(out, r.proximity, r.slice.occupations, sizes, min_edge);
      }
      if (!locals_path.empty()) {
        std::vector<double> locals, births, emi;
        std::vector<std::string> regions, centuries;
        for (int c = kFirstCentury; c <= kLastCentury; ++c) {
          const RoleMeasures* l = m.find(Century{c}, Role::Locals);
          const RoleMeasures* b = m.find(Century{c}, Role::Births);
          const RoleMeasures* e = m.find(Century{c}, Role::Emi);
          if (!l || !b || !e) continue;
          for (std::size_t i = 0; i < l->slice.regions.size(); ++i) {
            const auto& reg = l->slice.regions[i];
            for (std::size_t k = 0; k < l->slice.occupations.size(); ++k) {
              const auto& occ = l->slice.occupations[k];
              const int bi = b->row(reg), bk = b->col(occ), ei = e->row(reg), ek = e->col(occ);
              if (bi < 0 || bk < 0 || ei < 0 || ek < 0) continue;
              locals.push_back(l->density.omega(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
              births.push_back(b->density.omega(bi, bk));
              emi.push_back(e->density.omega(ei, ek));
              regions.push_back(reg);
              centuries.push_back("c" + std::to_string(c));
            }
          }
        }
        const LocalsProxyFit proxy = locals_proxy_fit(locals, births, emi, regions, centuries);
        nlohmann::ordered_json j;
        j["births_coefficient"] = proxy.births_coefficient;
        j["emigrants_coefficient"] = proxy.emigrants_coefficient;
        j["r_squared"] = proxy.r_squared;
        j["n"] = proxy.n;
        auto out = open_out(locals_path);
        out << j.dump(2) << '\n';
      }
    } else if (*spatial_cmd) {
      const Century t = century_arg(century);
      const Corpus corpus = load_corpus_file(corpus_path);
      const MeasureSet m = compute_measures(corpus, tabulate_counts(corpus), measure_args.options());
      const RoleMeasures& r = role_slice(m, t, "births");
      std::vector<RegionRecord> records;
      for (const auto& code : r.slice.regions) records.push_back(corpus.regions.at(static_cast<std::size_t>(corpus.regions.index_of(code))));
      const WeightMatrix w = inverse_distance_weights(records);
      const Eigen::MatrixXd rho_m = spatial_lag(w.weights, r.specialization.cells.cast<double>());
      const Eigen::MatrixXd rho_omega = spatial_lag(w.weights, r.density.omega);
      auto out = open_out(out_path);
      csv::write_row(out, {"region", "occupation", "rho_M", "rho_omega"});
      for (Eigen::Index i = 0; i < rho_m.rows(); ++i) {
        for (Eigen::Index k = 0; k < rho_m.cols(); ++k) {
          csv::write_row(out, {r.slice.regions[static_cast<std::size_t>(i)], r.slice.occupations[static_cast<std::size_t>(k)],
                               csv::format_double(rho_m(i, k)), csv::format_double(rho_omega(i, k))});
        }
      }
    } else if (*fit_cmd) {
      const DataTable panel = DataTable::read_csv_file(panel_path);
      const RegressionSpec spec = spec_from_json(read_json(spec_path));
      const Design d = build_design(panel, spec);
      const FitResult f = fit(d);
      auto out = open_out(out_path);
      out << to_json(f, d).dump(2) << '\n';
    } else if (*panel_cmd) {
      const Corpus corpus = load_corpus_file(corpus_path);
      const Panel panel = assemble_panel(corpus, measure_args.options());
      auto out = open_out(out_path);
      panel.table.write_csv(out);
      if (!metadata_path.empty()) {
        auto meta = open_out(metadata_path);
        meta << panel.metadata.dump(2) << '\n';
      }
    } else if (*suite_cmd) {
      const Corpus corpus = load_corpus_file(corpus_path);
      const SuiteReport report = run_suite(corpus, suite_name, measure_args.options());
      write_report(report, out_path);
      for (const auto& c : report.columns) {
        if (!c.error.empty()) std::cerr << report.name << " " << c.column.label << ": " << c.error << '\n';
      }
    } else if (*margins_cmd) {
      const nlohmann::json saved = read_json(fit_path);
      const DataTable panel = DataTable::read_csv_file(panel_path);
      const Design d = build_design(panel, spec_from_json(saved.at("spec")));
      const FitResult f = fit_from_json(saved, d);
      nlohmann::ordered_json j;
      j["variable"] = variable;
      j["kind"] = kind;
      MarginalEffect me;
      if (kind == "plus1" || kind == "plus1pct") {
        me = counterfactual_count_ame(d, f, variable, kind == "plus1" ? CountDelta::PlusOne : CountDelta::PlusOnePercent);
      } else {
        me = average_marginal_effect(d, f, variable, parse_ame_kind(kind));
      }
      j["step"] = me.step;
      j["effect"] = me.effect;
      j["percentage_points"] = me.percentage_points();
      j["n"] = d.n();
      if (out_path.empty()) {
        std::cout << j.dump(2) << '\n';
      } else {
        auto out = open_out(out_path);
        out << j.dump(2) << '\n';
      }
    } else if (*synth_cmd) {
      write_synthetic(generate_synthetic(synth), out_path);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::Estimation ? kExitEstimation : kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
