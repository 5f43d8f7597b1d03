#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "agglomer/econometrics.hpp"
#include "agglomer/specialization.hpp"

namespace agglomer {

// phi(k, k') = co-occurrence / max(ubiquity_k, ubiquity_k'); 0 when both
// activities are absent everywhere.
Eigen::MatrixXd proximity(const SpecializationMatrix& m);

struct DensityOptions {
  bool exclude_self = false;
};

struct DensityMatrix {
  Eigen::MatrixXd omega;  // regions x activities, percent
  // Activities whose proximity row sums to zero; their density is 0.
  std::vector<int> isolated_activities;
};

// omega(i, k) = 100 * sum_k' M(i, k') phi(k, k') / sum_k' phi(k, k').
DensityMatrix relatedness_density(const SpecializationMatrix& m, const Eigen::MatrixXd& phi,
                                  const DensityOptions& options = {});

// Single cell of the density, guarded like the matrix version.
double relatedness_density(const SpecializationMatrix& m, const Eigen::MatrixXd& phi, Eigen::Index region,
                           Eigen::Index activity, const DensityOptions& options = {});

struct LocalsProxyFit {
  double births_coefficient = 0.0;
  double emigrants_coefficient = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
  FitResult fit;
};

// OLS of the strict-locals density on the births and emigrant densities with
// region and century fixed effects. Inputs are aligned per observation.
LocalsProxyFit locals_proxy_fit(const std::vector<double>& omega_locals, const std::vector<double>& omega_births,
                                const std::vector<double>& omega_emi, const std::vector<std::string>& region,
                                const std::vector<std::string>& century);

}  // namespace agglomer
