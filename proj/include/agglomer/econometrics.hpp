#pragma once

#include <array>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "agglomer/table.hpp"

namespace agglomer {

enum class Family { Logistic, NegBin, Gaussian };
enum class Transform { Identity, Asinh, Log };

std::string to_string(Family family);
std::string to_string(Transform transform);
Family parse_family(const std::string& name);
Transform parse_transform(const std::string& name);

struct CovariateSpec {
  std::string column;
  Transform transform = Transform::Identity;
};

// Declarative model description. Each fixed-effect entry is a tuple of
// columns whose cross-classification forms one factor. Interaction members
// name covariate columns (used with their declared transform) or label
// columns, which expand to one product per non-reference level.
struct RegressionSpec {
  Family family = Family::Logistic;
  std::string response;
  std::vector<CovariateSpec> covariates;
  std::vector<std::array<std::string, 2>> interactions;
  std::vector<std::vector<std::string>> fixed_effects;
  std::vector<std::string> clusters;
};

nlohmann::ordered_json to_json(const RegressionSpec& spec);
RegressionSpec spec_from_json(const nlohmann::json& j);

// One interacted fixed-effect factor. Level 0 is the reference and has no
// parameter; rows at the reference carry index -1.
struct FactorBlock {
  std::string name;
  std::vector<std::string> levels;
  std::vector<int> index;

  std::size_t parameters() const { return levels.empty() ? 0 : levels.size() - 1; }
};

// A term of a dense column: a transformed numeric source or the indicator
// of one level of a label column.
struct Term {
  int source = -1;  // numeric source index, or -1 for an indicator
  Transform transform = Transform::Identity;
  int label_slot = -1;
  int level = -1;
};

struct DenseColumn {
  std::string name;
  std::vector<Term> terms;  // empty product = intercept
};

struct Design {
  RegressionSpec spec;

  Eigen::MatrixXd dense;  // n x q; column 0 is the intercept
  std::vector<DenseColumn> columns;
  std::vector<std::string> sources;   // raw numeric source column names
  Eigen::MatrixXd raw;                // n x sources, untransformed
  std::vector<std::string> label_sources;
  std::vector<std::vector<int>> label_codes;  // per label source, per row

  std::vector<FactorBlock> factors;
  Eigen::VectorXd response;
  std::vector<std::vector<int>> clusters;  // one id vector per cluster factor
  std::vector<std::size_t> rows;           // input-table row of each design row

  std::size_t n_input = 0;
  std::size_t n_dropped_missing = 0;
  std::size_t n_dropped_separation = 0;

  // Parameters structurally collinear with earlier ones; fixed at zero.
  std::vector<bool> aliased;

  std::size_t n() const { return static_cast<std::size_t>(response.size()); }
  std::size_t n_dense() const { return static_cast<std::size_t>(dense.cols()); }
  std::size_t n_params() const;
  std::size_t factor_offset(std::size_t f) const;
  std::size_t n_estimated() const;

  Eigen::VectorXd linear_predictor(const Eigen::VectorXd& params) const;
  Eigen::VectorXd linear_predictor(const Eigen::VectorXd& params, const Eigen::MatrixXd& dense_override) const;
  // Dense block recomputed after perturbing one raw source column.
  Eigen::MatrixXd dense_with(std::size_t source, const std::function<double(double)>& perturb) const;
  int source_index(const std::string& name) const;
};

// Expands fixed effects, applies transforms and interactions, drops rows with
// missing inputs, and (logistic) drops fixed-effect cells whose response is
// constant, iterating to a fixed point. Count models drop all-zero cells.
// Throws RankDeficient if no non-FE coefficient is identified.
Design build_design(const DataTable& panel, const RegressionSpec& spec);

struct ClusterVcov {
  Eigen::MatrixXd vcov;
  std::vector<std::size_t> n_clusters;
  bool floored = false;
};

struct FitOptions {
  int max_iterations = 100;
  double score_tolerance = 1e-8;
  double loglik_tolerance = 1e-10;
  // NegBin only: hold the dispersion fixed (infinity gives Poisson).
  std::optional<double> fixed_theta;
};

struct FitResult {
  Family family = Family::Logistic;
  RegressionSpec spec;

  std::vector<std::string> names;  // dense coefficients
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd vcov;
  std::string vcov_type;
  bool vcov_floored = false;
  std::vector<std::size_t> n_clusters;

  Eigen::VectorXd params;  // full vector: dense then factor levels
  double theta = std::numeric_limits<double>::infinity();
  double theta_se = std::numeric_limits<double>::quiet_NaN();
  bool dispersion_boundary = false;

  double loglik = 0.0;
  double null_loglik = 0.0;
  double pseudo_r2 = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  double r_squared = std::numeric_limits<double>::quiet_NaN();  // gaussian only
  std::size_t n_used = 0;
  std::size_t n_dropped_separation = 0;
  std::size_t n_dropped_missing = 0;
  std::size_t n_parameters = 0;  // counted in AIC/BIC

  bool converged = false;
  int iterations = 0;
  double max_abs_score = 0.0;

  Eigen::VectorXd fitted;  // mean response per design row

  Eigen::VectorXd std_errors() const;
  int coefficient_index(const std::string& name) const;  // -1 if absent
};

// Log-likelihood and score of a family at arbitrary parameters. theta is
// used by NegBin only (infinity = Poisson).
double log_likelihood(const Design& d, Family family, const Eigen::VectorXd& params, double theta = 1.0);
Eigen::VectorXd score(const Design& d, Family family, const Eigen::VectorXd& params, double theta = 1.0);
// dl/dtheta for NegBin.
double theta_score(const Design& d, const Eigen::VectorXd& params, double theta);

FitResult fit_logistic(const Design& d, const FitOptions& options = {});
FitResult fit_negbin(const Design& d, const FitOptions& options = {});
FitResult fit_ols(const Design& d, const FitOptions& options = {});
// Dispatches on spec.family and attaches the covariance implied by
// spec.clusters (none: model-based, one: one-way, two: two-way).
FitResult fit(const Design& d, const FitOptions& options = {});

// Cluster-robust sandwich for the dense coefficients. One id vector gives
// one-way clustering; two give Cameron-Gelbach-Miller two-way clustering.
// Each component carries its own G/(G-1) factor.
ClusterVcov clustered_vcov(const Design& d, const FitResult& fit, std::span<const std::vector<int>> clusters);
Eigen::MatrixXd model_vcov(const Design& d, const FitResult& fit);

struct FitStatistics {
  double pseudo_r2;
  double aic;
  double bic;
};

FitStatistics fit_statistics(double loglik, double null_loglik, std::size_t n_parameters, std::size_t n);

enum class AmeKind { Binary01, SdIncrease, Unit };
enum class CountDelta { PlusOne, PlusOnePercent };

AmeKind parse_ame_kind(const std::string& name);

// Average change in the mean response; probability units for logistic.
struct MarginalEffect {
  std::string variable;
  double effect = 0.0;
  double step = 0.0;  // size of the perturbation applied to the raw variable

  double percentage_points() const { return 100.0 * effect; }
};

MarginalEffect average_marginal_effect(const Design& d, const FitResult& fit, const std::string& variable, AmeKind kind);
// Perturbs the raw count before its transform (e.g. asinh) is re-applied.
MarginalEffect counterfactual_count_ame(const Design& d, const FitResult& fit, const std::string& variable,
                                        CountDelta delta);

// Two-sided normal p-value and significance stars at 0.1/0.05/0.01.
double normal_p_value(double z);
std::string stars(double p_value);

nlohmann::ordered_json to_json(const FitResult& fit, const Design& d);
// Rebuilds parameters from a fit document against a design built from the
// same panel and spec. Throws UnknownParameter on mismatched levels.
FitResult fit_from_json(const nlohmann::json& j, const Design& d);

}  // namespace agglomer
