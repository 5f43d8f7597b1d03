#include "agglomer/relatedness.hpp"

#include <algorithm>

#include "agglomer/error.hpp"

namespace agglomer {

Eigen::MatrixXd proximity(const SpecializationMatrix& m) {
  const Eigen::MatrixXd cells = m.cells.cast<double>();
  const Eigen::MatrixXd co = cells.transpose() * cells;
  const auto k = co.rows();
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) {
      const int largest = std::max(m.ubiquity(a), m.ubiquity(b));
      phi(a, b) = largest > 0 ? co(a, b) / largest : 0.0;
    }
  }
  return phi;
}

DensityMatrix relatedness_density(const SpecializationMatrix& m, const Eigen::MatrixXd& phi, const DensityOptions& options) {
  if (phi.rows() != m.cols() || phi.cols() != m.cols()) {
    throw validation_error("ShapeMismatch", "proximity matrix does not match the activity count");
  }
  Eigen::MatrixXd weights = phi;
  if (options.exclude_self) weights.diagonal().setZero();
  const Eigen::MatrixXd numerator = m.cells.cast<double>() * weights;  // (i, k) = sum_k' M(i,k') phi(k',k)
  const Eigen::VectorXd denominator = weights.colwise().sum().transpose();
  DensityMatrix out;
  out.omega = Eigen::MatrixXd::Zero(m.rows(), m.cols());
  for (Eigen::Index k = 0; k < m.cols(); ++k) {
    if (!(denominator(k) > 0.0)) {
      out.isolated_activities.push_back(static_cast<int>(k));
      continue;
    }
    out.omega.col(k) = (100.0 * numerator.col(k) / denominator(k)).cwiseMin(100.0);
  }
  return out;
}

double relatedness_density(const SpecializationMatrix& m, const Eigen::MatrixXd& phi, Eigen::Index region,
                           Eigen::Index activity, const DensityOptions& options) {
  double num = 0.0;
  double den = 0.0;
  for (Eigen::Index k = 0; k < m.cols(); ++k) {
    if (options.exclude_self && k == activity) continue;
    num += m.cells(region, k) * phi(activity, k);
    den += phi(activity, k);
  }
  return den > 0.0 ? std::min(100.0, 100.0 * num / den) : 0.0;
}

LocalsProxyFit locals_proxy_fit(const std::vector<double>& omega_locals, const std::vector<double>& omega_births,
                                const std::vector<double>& omega_emi, const std::vector<std::string>& region,
                                const std::vector<std::string>& century) {
  const std::size_t n = omega_locals.size();
  if (omega_births.size() != n || omega_emi.size() != n || region.size() != n || century.size() != n) {
    throw validation_error("ShapeMismatch", "locals-proxy inputs differ in length");
  }
  DataTable table;
  table.add_numeric("omega_locals", omega_locals);
  table.add_numeric("omega_births", omega_births);
  table.add_numeric("omega_emi", omega_emi);
  table.add_labels("region", region);
  table.add_labels("century", century);

  RegressionSpec spec;
  spec.family = Family::Gaussian;
  spec.response = "omega_locals";
  spec.covariates = {{"omega_births", Transform::Identity}, {"omega_emi", Transform::Identity}};
  spec.fixed_effects = {{"region"}, {"century"}};
  const Design d = build_design(table, spec);

  LocalsProxyFit out;
  out.fit = fit(d);
  out.births_coefficient = out.fit.coefficients(1);
  out.emigrants_coefficient = out.fit.coefficients(2);
  out.r_squared = out.fit.r_squared;
  out.n = out.fit.n_used;
  return out;
}

}  // namespace agglomer
