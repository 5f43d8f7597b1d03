#include "normal_equations.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "agglomer/error.hpp"

namespace agglomer::detail {

NormalEquations::Layout NormalEquations::make_layout(const Design& d) {
  Layout layout;
  std::size_t best = 0;
  for (std::size_t f = 0; f < d.factors.size(); ++f) {
    if (d.factors[f].parameters() > best) {
      best = d.factors[f].parameters();
      layout.eliminated = static_cast<int>(f);
    }
  }
  const std::size_t p = d.n_params();
  layout.full_to_reduced.assign(p, -1);
  if (layout.eliminated >= 0) {
    layout.eliminated_offset = d.factor_offset(static_cast<std::size_t>(layout.eliminated));
    layout.eliminated_size = best;
  }
  for (std::size_t j = 0; j < p; ++j) {
    const bool in_eliminated = layout.eliminated >= 0 && j >= layout.eliminated_offset &&
                               j < layout.eliminated_offset + layout.eliminated_size;
    if (in_eliminated) continue;
    layout.full_to_reduced[j] = static_cast<int>(layout.reduced_to_full.size());
    layout.reduced_to_full.push_back(j);
  }
  return layout;
}

NormalEquations::Assembled NormalEquations::assemble(const Design& d, const Layout& layout, const Eigen::VectorXd& weights) {
  const std::size_t n = d.n();
  const std::size_t q = d.n_dense();
  const auto r = static_cast<Eigen::Index>(layout.reduced_to_full.size());
  Assembled a;
  a.schur = Eigen::MatrixXd::Zero(r, r);
  a.diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.eliminated_size));
  a.coupling.resize(layout.eliminated_size);

  // Reduced-index entries of one row: dense columns then one per factor.
  std::vector<std::pair<int, double>> entries;
  std::vector<std::vector<std::size_t>> rows_of_level(layout.eliminated_size);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weights(static_cast<Eigen::Index>(i));
    entries.clear();
    for (std::size_t j = 0; j < q; ++j) entries.emplace_back(static_cast<int>(j), d.dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    for (std::size_t f = 0; f < d.factors.size(); ++f) {
      const int level = d.factors[f].index[i];
      if (level < 0) continue;
      const std::size_t full = d.factor_offset(f) + static_cast<std::size_t>(level) - 1;
      if (static_cast<int>(f) == layout.eliminated) {
        rows_of_level[static_cast<std::size_t>(level) - 1].push_back(i);
        continue;
      }
      entries.emplace_back(layout.full_to_reduced[full], 1.0);
    }
    for (std::size_t u = 0; u < entries.size(); ++u) {
      const double wu = w * entries[u].second;
      if (wu == 0.0) continue;
      for (std::size_t v = u; v < entries.size(); ++v) {
        a.schur(entries[u].first, entries[v].first) += wu * entries[v].second;
      }
    }
  }
  // Entries were accumulated in one orientation per pair; symmetrize.
  for (Eigen::Index u = 0; u < r; ++u) {
    for (Eigen::Index v = u + 1; v < r; ++v) {
      const double s = a.schur(u, v) + a.schur(v, u);
      a.schur(u, v) = a.schur(v, u) = s;
    }
  }
  a.reduced_diag = a.schur.diagonal();

  std::vector<double> dense_part(q);
  std::vector<std::pair<int, double>> factor_part;
  for (std::size_t l = 0; l < layout.eliminated_size; ++l) {
    std::fill(dense_part.begin(), dense_part.end(), 0.0);
    factor_part.clear();
    double dl = 0.0;
    for (auto i : rows_of_level[l]) {
      const double w = weights(static_cast<Eigen::Index>(i));
      dl += w;
      for (std::size_t j = 0; j < q; ++j) dense_part[j] += w * d.dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      for (std::size_t f = 0; f < d.factors.size(); ++f) {
        if (static_cast<int>(f) == layout.eliminated) continue;
        const int level = d.factors[f].index[i];
        if (level < 0) continue;
        factor_part.emplace_back(layout.full_to_reduced[d.factor_offset(f) + static_cast<std::size_t>(level) - 1], w);
      }
    }
    std::sort(factor_part.begin(), factor_part.end());
    auto& h = a.coupling[l];
    for (std::size_t j = 0; j < q; ++j) {
      if (dense_part[j] != 0.0) h.emplace_back(static_cast<int>(j), dense_part[j]);
    }
    for (std::size_t u = 0; u < factor_part.size();) {
      std::size_t v = u;
      double s = 0.0;
      while (v < factor_part.size() && factor_part[v].first == factor_part[u].first) s += factor_part[v++].second;
      h.emplace_back(factor_part[u].first, s);
      u = v;
    }
    a.diag(static_cast<Eigen::Index>(l)) = dl;
    if (!(dl > 0.0)) continue;
    for (const auto& [iu, vu] : h) {
      const double scaled = vu / dl;
      for (const auto& [iv, vv] : h) a.schur(iu, iv) -= scaled * vv;
    }
  }
  return a;
}

std::vector<bool> NormalEquations::detect_aliasing(const Design& d) {
  const Layout layout = make_layout(d);
  const Assembled a = assemble(d, layout, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(d.n())));
  const auto r = a.schur.rows();
  std::vector<bool> aliased(d.n_params(), false);
  // Greedy Cholesky in column order; a column whose residual pivot vanishes
  // relative to its own scale is a combination of earlier columns.
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(r, r);
  std::vector<bool> kept(static_cast<std::size_t>(r), false);
  for (Eigen::Index j = 0; j < r; ++j) {
    double pivot = a.schur(j, j);
    for (Eigen::Index k = 0; k < j; ++k) {
      if (kept[static_cast<std::size_t>(k)]) pivot -= l(j, k) * l(j, k);
    }
    const double scale = a.reduced_diag(j);
    if (!(scale > 0.0) || pivot <= 1e-9 * scale) {
      aliased[layout.reduced_to_full[static_cast<std::size_t>(j)]] = true;
      continue;
    }
    kept[static_cast<std::size_t>(j)] = true;
    const double root = std::sqrt(pivot);
    l(j, j) = root;
    for (Eigen::Index i = j + 1; i < r; ++i) {
      double s = a.schur(i, j);
      for (Eigen::Index k = 0; k < j; ++k) {
        if (kept[static_cast<std::size_t>(k)]) s -= l(i, k) * l(j, k);
      }
      l(i, j) = s / root;
    }
  }
  // Eliminated levels with no rows would be unidentified.
  for (std::size_t lv = 0; lv < layout.eliminated_size; ++lv) {
    if (!(a.diag(static_cast<Eigen::Index>(lv)) > 0.0)) aliased[layout.eliminated_offset + lv] = true;
  }
  return aliased;
}

NormalEquations::NormalEquations(const Design& d, const Eigen::VectorXd& weights)
    : layout_(make_layout(d)), system_(assemble(d, layout_, weights)) {
  for (std::size_t a = 0; a < layout_.reduced_to_full.size(); ++a) {
    if (!d.aliased[layout_.reduced_to_full[a]]) active_.push_back(static_cast<int>(a));
  }
  const auto m = static_cast<Eigen::Index>(active_.size());
  Eigen::MatrixXd sub(m, m);
  for (Eigen::Index u = 0; u < m; ++u) {
    for (Eigen::Index v = 0; v < m; ++v) sub(u, v) = system_.schur(active_[u], active_[v]);
  }
  factor_.compute(sub);
  if (factor_.info() != Eigen::Success) throw estimation_error("SingularSystem", "normal equations could not be factorized");
}

Eigen::VectorXd NormalEquations::solve(const Eigen::VectorXd& rhs) const {
  const auto& L = layout_;
  Eigen::VectorXd reduced(static_cast<Eigen::Index>(L.reduced_to_full.size()));
  for (std::size_t a = 0; a < L.reduced_to_full.size(); ++a) reduced(static_cast<Eigen::Index>(a)) = rhs(static_cast<Eigen::Index>(L.reduced_to_full[a]));
  for (std::size_t l = 0; l < L.eliminated_size; ++l) {
    const double dl = system_.diag(static_cast<Eigen::Index>(l));
    if (!(dl > 0.0)) continue;
    const double g = rhs(static_cast<Eigen::Index>(L.eliminated_offset + l)) / dl;
    for (const auto& [idx, val] : system_.coupling[l]) reduced(idx) -= val * g;
  }
  Eigen::VectorXd sub(static_cast<Eigen::Index>(active_.size()));
  for (std::size_t u = 0; u < active_.size(); ++u) sub(static_cast<Eigen::Index>(u)) = reduced(active_[u]);
  const Eigen::VectorXd sub_solution = factor_.solve(sub);

  Eigen::VectorXd z_reduced = Eigen::VectorXd::Zero(reduced.size());
  for (std::size_t u = 0; u < active_.size(); ++u) z_reduced(active_[u]) = sub_solution(static_cast<Eigen::Index>(u));

  Eigen::VectorXd z = Eigen::VectorXd::Zero(rhs.size());
  for (std::size_t a = 0; a < L.reduced_to_full.size(); ++a) z(static_cast<Eigen::Index>(L.reduced_to_full[a])) = z_reduced(static_cast<Eigen::Index>(a));
  for (std::size_t l = 0; l < L.eliminated_size; ++l) {
    const double dl = system_.diag(static_cast<Eigen::Index>(l));
    if (!(dl > 0.0)) continue;
    double s = rhs(static_cast<Eigen::Index>(L.eliminated_offset + l));
    for (const auto& [idx, val] : system_.coupling[l]) s -= val * z_reduced(idx);
    z(static_cast<Eigen::Index>(L.eliminated_offset + l)) = s / dl;
  }
  return z;
}

Eigen::VectorXd cross_product(const Design& d, const Eigen::VectorXd& r) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d.n_params()));
  g.head(static_cast<Eigen::Index>(d.n_dense())) = d.dense.transpose() * r;
  for (std::size_t f = 0; f < d.factors.size(); ++f) {
    const std::size_t off = d.factor_offset(f);
    const auto& idx = d.factors[f].index;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] > 0) g(static_cast<Eigen::Index>(off + static_cast<std::size_t>(idx[i]) - 1)) += r(static_cast<Eigen::Index>(i));
    }
  }
  return g;
}

}  // namespace agglomer::detail
