#include "agglomer/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "agglomer/error.hpp"

namespace agglomer {

double haversine_km(const RegionRecord& a, const RegionRecord& b) {
  constexpr double deg = std::numbers::pi / 180.0;
  const double phi1 = a.centroid_lat * deg;
  const double phi2 = b.centroid_lat * deg;
  const double dphi = phi2 - phi1;
  const double dlambda = (b.centroid_lon - a.centroid_lon) * deg;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(std::min(1.0, h)));
}

WeightMatrix inverse_distance_weights(std::span<const RegionRecord> regions) {
  const auto n = static_cast<Eigen::Index>(regions.size());
  WeightMatrix out{Eigen::MatrixXd::Zero(n, n), 0};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double d = haversine_km(regions[i], regions[j]);
      if (d < 1.0) {
        if (d == 0.0) ++out.coincident_pairs;
        d = 1.0;
      }
      out.weights(i, j) = out.weights(j, i) = 1.0 / d;
    }
  }
  return out;
}

Eigen::MatrixXd spatial_lag(const Eigen::MatrixXd& weights, const Eigen::MatrixXd& values) {
  if (weights.rows() != weights.cols() || weights.rows() != values.rows()) {
    throw validation_error("ShapeMismatch", "weight matrix and values cover different regions");
  }
  const Eigen::VectorXd denom = weights.colwise().sum().transpose();
  for (Eigen::Index i = 0; i < denom.size(); ++i) {
    if (!(denom(i) > 0.0)) throw validation_error("IsolatedRegion", "region " + std::to_string(i) + " has no neighbours");
  }
  Eigen::MatrixXd lag = weights.transpose() * values;
  return lag.array().colwise() / denom.array();
}

Eigen::VectorXd spatial_lag_M(const Eigen::MatrixXd& weights, const Eigen::VectorXd& specialization) {
  return spatial_lag(weights, specialization);
}

Eigen::VectorXd spatial_lag_omega(const Eigen::MatrixXd& weights, const Eigen::VectorXd& density) {
  return spatial_lag(weights, density);
}

}  // namespace agglomer
