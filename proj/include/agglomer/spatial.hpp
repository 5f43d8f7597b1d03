#pragma once

#include <span>

#include <Eigen/Dense>

#include "agglomer/corpus.hpp"

namespace agglomer {

inline constexpr double kEarthRadiusKm = 6371.0088;

// Great-circle distance between two centroids.
double haversine_km(const RegionRecord& a, const RegionRecord& b);

// Inverse-distance weights W(i', i) = 1 / d(i', i), zero diagonal.
struct WeightMatrix {
  Eigen::MatrixXd weights;
  // Distinct regions sharing a centroid; their distance is floored at 1 km.
  std::size_t coincident_pairs = 0;
};

WeightMatrix inverse_distance_weights(std::span<const RegionRecord> regions);

// rho_i = sum_i' W(i', i) v_i' / sum_i' W(i', i), applied column by column.
// Throws IsolatedRegion when a region has no positive weight.
Eigen::MatrixXd spatial_lag(const Eigen::MatrixXd& weights, const Eigen::MatrixXd& values);

// Lag of a binary specialization column (values in [0, 1]).
Eigen::VectorXd spatial_lag_M(const Eigen::MatrixXd& weights, const Eigen::VectorXd& specialization);
// Lag of a relatedness-density column (values in [0, 100]).
Eigen::VectorXd spatial_lag_omega(const Eigen::MatrixXd& weights, const Eigen::VectorXd& density);

}  // namespace agglomer
