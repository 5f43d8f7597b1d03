#include "agglomer/specialization.hpp"

#include <algorithm>
#include <numeric>

#include "agglomer/error.hpp"

namespace agglomer {

CountSlice make_slice(const CountTensor& tensor, Century t, Role role, const KeptIndex& kept) {
  const Eigen::MatrixXd full = tensor.matrix(t, role);
  CountSlice slice;
  slice.counts.resize(static_cast<Eigen::Index>(kept.regions.size()), static_cast<Eigen::Index>(kept.occupations.size()));
  for (std::size_t a = 0; a < kept.regions.size(); ++a) {
    slice.regions.push_back(tensor.regions()[kept.regions[a]]);
    for (std::size_t b = 0; b < kept.occupations.size(); ++b) {
      slice.counts(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = full(kept.regions[a], kept.occupations[b]);
    }
  }
  for (int k : kept.occupations) slice.occupations.push_back(tensor.occupations()[k]);
  return slice;
}

Eigen::MatrixXd expected_naive(const Eigen::MatrixXd& counts) {
  const double total = counts.sum();
  if (!(total > 0.0)) throw validation_error("DegenerateMatrix", "expected counts need a positive total");
  const Eigen::VectorXd rows = counts.rowwise().sum();
  const Eigen::RowVectorXd cols = counts.colwise().sum();
  return (rows * cols) / total;
}

Eigen::MatrixXd rca_ratio(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& expected) {
  if (counts.rows() != expected.rows() || counts.cols() != expected.cols()) {
    throw validation_error("ShapeMismatch", "observed and expected matrices differ in shape");
  }
  Eigen::MatrixXd r(counts.rows(), counts.cols());
  for (Eigen::Index i = 0; i < counts.rows(); ++i) {
    for (Eigen::Index k = 0; k < counts.cols(); ++k) {
      const double n = counts(i, k);
      const double e = expected(i, k);
      if (e > 0.0) {
        r(i, k) = n / e;
      } else if (n == 0.0) {
        r(i, k) = 0.0;
      } else {
        throw validation_error("InconsistentExpectation",
                               "zero expected count with positive observed count at (" + std::to_string(i) + ", " +
                                   std::to_string(k) + ")");
      }
    }
  }
  return r;
}

SpecializationMatrix make_specialization(BinaryMatrix cells) {
  SpecializationMatrix m;
  m.diversity = cells.rowwise().sum();
  m.ubiquity = cells.colwise().sum().transpose();
  m.cells = std::move(cells);
  return m;
}

SpecializationMatrix binarize(const Eigen::MatrixXd& ratio) {
  return make_specialization((ratio.array() >= 1.0).cast<int>().matrix());
}

Eigen::MatrixXd joint_ratio(const Eigen::MatrixXd& births, const Eigen::MatrixXd& deaths) {
  if (births.rows() != deaths.rows() || births.cols() != deaths.cols()) {
    throw validation_error("ShapeMismatch", "births and deaths slices must share an index set");
  }
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(births.rows(), births.cols());
  if (births.sum() > 0.0) expected += expected_naive(births);
  if (deaths.sum() > 0.0) expected += expected_naive(deaths);
  if (!(expected.sum() > 0.0)) throw validation_error("DegenerateMatrix", "joint ratio needs births or deaths");
  return rca_ratio(births + deaths, expected);
}

NestedOrder nested_sort(const SpecializationMatrix& m, const std::vector<std::string>& region_codes,
                        const std::vector<std::string>& activity_codes) {
  if (static_cast<Eigen::Index>(region_codes.size()) != m.rows() ||
      static_cast<Eigen::Index>(activity_codes.size()) != m.cols()) {
    throw validation_error("ShapeMismatch", "labels do not match the specialization matrix");
  }
  NestedOrder order;
  order.regions.resize(region_codes.size());
  order.activities.resize(activity_codes.size());
  std::iota(order.regions.begin(), order.regions.end(), 0);
  std::iota(order.activities.begin(), order.activities.end(), 0);
  std::sort(order.regions.begin(), order.regions.end(), [&](int a, int b) {
    if (m.diversity(a) != m.diversity(b)) return m.diversity(a) > m.diversity(b);
    return region_codes[a] < region_codes[b];
  });
  std::sort(order.activities.begin(), order.activities.end(), [&](int a, int b) {
    if (m.ubiquity(a) != m.ubiquity(b)) return m.ubiquity(a) > m.ubiquity(b);
    return activity_codes[a] < activity_codes[b];
  });
  return order;
}

}  // namespace agglomer
