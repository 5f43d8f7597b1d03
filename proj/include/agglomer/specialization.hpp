#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "agglomer/corpus.hpp"

namespace agglomer {

using BinaryMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

// A filtered (century, role) count slice with its row/column labels.
struct CountSlice {
  std::vector<std::string> regions;
  std::vector<std::string> occupations;
  Eigen::MatrixXd counts;
};

CountSlice make_slice(const CountTensor& tensor, Century t, Role role, const KeptIndex& kept);

// Bins-and-balls expectation: row_sum * col_sum / total.
// Throws DegenerateMatrix when the total is zero.
Eigen::MatrixXd expected_naive(const Eigen::MatrixXd& counts);

// R = N / Nhat with 0/0 := 0. Throws InconsistentExpectation on x/0, x > 0.
Eigen::MatrixXd rca_ratio(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& expected);

struct SpecializationMatrix {
  BinaryMatrix cells;
  Eigen::VectorXi diversity;  // row sums
  Eigen::VectorXi ubiquity;   // column sums

  Eigen::Index rows() const { return cells.rows(); }
  Eigen::Index cols() const { return cells.cols(); }
};

SpecializationMatrix make_specialization(BinaryMatrix cells);

// M = 1 iff R >= 1.
SpecializationMatrix binarize(const Eigen::MatrixXd& ratio);

// (Nb + Nd) / (naive(Nb) + naive(Nd)) on a common index set.
Eigen::MatrixXd joint_ratio(const Eigen::MatrixXd& births, const Eigen::MatrixXd& deaths);

struct NestedOrder {
  std::vector<int> regions;     // positions into the row labels
  std::vector<int> activities;  // positions into the column labels
};

// Regions by descending diversity, activities by descending ubiquity; ties by
// ascending code.
NestedOrder nested_sort(const SpecializationMatrix& m, const std::vector<std::string>& region_codes,
                        const std::vector<std::string>& activity_codes);

}  // namespace agglomer
