#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "agglomer/specialization.hpp"

namespace agglomer::svg {

// Binary matrix as a grid of cells in the given row/column order.
void heatmap(std::ostream& out, const SpecializationMatrix& m, const std::vector<std::string>& row_labels,
             const std::vector<std::string>& col_labels, const NestedOrder& order);

// Proximity graph on a circle; node area follows activity counts and edges
// with phi below min_weight are omitted.
void network(std::ostream& out, const Eigen::MatrixXd& phi, const std::vector<std::string>& labels,
             const std::vector<double>& node_counts, double min_weight = 0.0);

}  // namespace agglomer::svg
