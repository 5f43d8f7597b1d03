#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "agglomer/econometrics.hpp"

namespace agglomer::detail {

// X' W X for a design whose fixed effects are stored as level indices. The
// factor with the most parameters is eliminated through its diagonal block,
// leaving a dense Schur complement over the dense columns and the remaining
// factors. Aliased parameters are pinned at zero.
class NormalEquations {
 public:
  NormalEquations(const Design& d, const Eigen::VectorXd& weights);

  // Solution of H z = rhs over the full parameter vector.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  // Structural collinearity under unit weights, earlier columns kept first.
  static std::vector<bool> detect_aliasing(const Design& d);

 private:
  struct Layout {
    int eliminated = -1;             // factor index, or -1
    std::size_t eliminated_offset = 0;
    std::size_t eliminated_size = 0;
    std::vector<int> full_to_reduced;
    std::vector<std::size_t> reduced_to_full;
  };
  static Layout make_layout(const Design& d);

  struct Assembled {
    Eigen::MatrixXd schur;  // reduced x reduced
    Eigen::VectorXd diag;   // eliminated-block diagonal
    std::vector<std::vector<std::pair<int, double>>> coupling;  // per eliminated level
    Eigen::VectorXd reduced_diag;  // diagonal before elimination
  };
  static Assembled assemble(const Design& d, const Layout& layout, const Eigen::VectorXd& weights);

  Layout layout_;
  Assembled system_;
  std::vector<int> active_;  // reduced indices that are not aliased
  Eigen::LDLT<Eigen::MatrixXd> factor_;
};

// X' r for per-row values r.
Eigen::VectorXd cross_product(const Design& d, const Eigen::VectorXd& r);

}  // namespace agglomer::detail
