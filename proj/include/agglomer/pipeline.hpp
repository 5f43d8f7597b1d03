#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "agglomer/corpus.hpp"
#include "agglomer/econometrics.hpp"
#include "agglomer/relatedness.hpp"
#include "agglomer/specialization.hpp"
#include "agglomer/table.hpp"

namespace agglomer {

enum class Expectation { Naive, NegBin };
enum class ProximityMode { Separate, Joint };

Expectation parse_expectation(const std::string& name);
ProximityMode parse_proximity(const std::string& name);
std::string to_string(Expectation e);
std::string to_string(ProximityMode p);

struct MeasureOptions {
  Expectation expectation = Expectation::Naive;
  ProximityMode proximity = ProximityMode::Separate;
  DensityOptions density;
};

// Everything derived from one filtered (century, role) slice.
struct RoleMeasures {
  Century century;
  Role role = Role::Births;
  CountSlice slice;
  Eigen::MatrixXd expected;
  Eigen::MatrixXd ratio;
  SpecializationMatrix specialization;
  Eigen::MatrixXd proximity;  // over slice.occupations, as used for the densities
  DensityMatrix density;
  bool model_expectation = false;

  int row(const std::string& region) const;
  int col(const std::string& occupation) const;

  std::map<std::string, int> row_index;
  std::map<std::string, int> col_index;
};

struct ExpectationModel {
  Role role = Role::Births;
  Design design;
  FitResult fit;
  // Fitted mean keyed by (century, region index, occupation index) in the
  // tensor's label order.
  std::map<std::tuple<int, int, int>, double> fitted;
};

struct MeasureSet {
  MeasureOptions options;
  std::map<std::pair<int, int>, RoleMeasures> slices;  // (century, role)
  std::map<int, RoleMeasures> joint;                    // births + deaths, per century
  std::vector<ExpectationModel> expectation_models;
  std::vector<std::string> notes;

  const RoleMeasures* find(Century t, Role role) const;
  const RoleMeasures* find_joint(Century t) const;
};

// Counts, expectations, ratios, specialization, proximity, and densities for
// every century and role whose slice survives the sparse filter.
MeasureSet compute_measures(const Corpus& corpus, const CountTensor& counts, const MeasureOptions& options);

// RCA of the raw births slice (the lagged specialization share used by the
// count expectation model); 0 where margins vanish.
Eigen::MatrixXd births_share_ratio(const CountTensor& counts, Century t);

// Negative-binomial expectation model for one role, pooled over centuries
// after the first; returns fitted means keyed by (century, region, occupation).
ExpectationModel fit_expectation_model(const CountTensor& counts, Role role,
                                       const std::map<int, KeptIndex>& kept_by_century);

struct Panel {
  DataTable table;
  nlohmann::ordered_json metadata;
};

// One row per (region, occupation, century) whose births cell survives the
// filter at both t-1 and t. Throws MissingAdjacentCentury when no two
// consecutive centuries exist.
Panel assemble_panel(const Corpus& corpus, const MeasureOptions& options = {});
Panel assemble_panel(const Corpus& corpus, const CountTensor& counts, const MeasureSet& measures);

enum class CitySize { Small, Large };

struct PanelFilter {
  std::optional<std::pair<int, int>> centuries;  // inclusive outcome-century range
  std::vector<std::string> broad_categories;
  std::optional<CitySize> city_size;
};

// Throws EmptySubset when nothing matches.
DataTable subset(const DataTable& panel, const PanelFilter& filter);

struct AmeRequest {
  std::string variable;
  AmeKind kind = AmeKind::Binary01;
};

struct CountAmeRequest {
  std::string variable;
  CountDelta delta = CountDelta::PlusOne;
};

struct SuiteColumn {
  std::string label;
  RegressionSpec spec;
  PanelFilter filter;
  std::vector<AmeRequest> ames;
  std::vector<CountAmeRequest> count_ames;
};

struct SuiteDefinition {
  std::string name;
  std::vector<SuiteColumn> columns;
};

const std::vector<std::string>& suite_names();
// Columns that split by category read the category list from the panel.
SuiteDefinition suite_definition(const std::string& name, const DataTable& panel);

struct ColumnResult {
  SuiteColumn column;
  std::optional<Design> design;
  std::optional<FitResult> fit;
  std::vector<MarginalEffect> ames;
  std::vector<MarginalEffect> count_ames;
  std::string error;
};

struct SuiteReport {
  std::string name;
  MeasureOptions options;
  std::vector<ColumnResult> columns;
  nlohmann::ordered_json panel_metadata;

  nlohmann::ordered_json to_json() const;
  void write_coefficients_csv(std::ostream& out) const;
};

// Fits every column of a suite on the given panel; columns are estimated
// concurrently and reported in definition order.
SuiteReport run_suite(const SuiteDefinition& suite, const Panel& panel, const MeasureOptions& options = {});
SuiteReport run_suite(const Corpus& corpus, const std::string& name, const MeasureOptions& options = {});

// Writes <dir>/<name>.json and <dir>/<name>_coefficients.csv.
void write_report(const SuiteReport& report, const std::filesystem::path& dir);

}  // namespace agglomer
