#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "agglomer/econometrics.hpp"
#include "agglomer/error.hpp"
#include "normal_equations.hpp"

namespace agglomer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Beyond this the dispersion is indistinguishable from the Poisson limit.
constexpr double kThetaBoundary = 1e8;

using Vec = Eigen::VectorXd;
using Idx = Eigen::Index;

double inv_logit(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double softplus(double eta) { return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

Vec mean_of(Family family, const Vec& eta) {
  Vec mu(eta.size());
  for (Idx i = 0; i < eta.size(); ++i) {
    switch (family) {
      case Family::Logistic: mu(i) = inv_logit(eta(i)); break;
      case Family::NegBin: mu(i) = std::exp(eta(i)); break;
      case Family::Gaussian: mu(i) = eta(i); break;
    }
  }
  return mu;
}

double negbin_term(double y, double mu, double theta) {
  if (std::isinf(theta)) return y * std::log(mu) - mu - std::lgamma(y + 1.0);
  return std::lgamma(y + theta) - std::lgamma(theta) - std::lgamma(y + 1.0) + theta * std::log(theta / (theta + mu)) +
         (y > 0.0 ? y * std::log(mu / (theta + mu)) : 0.0);
}

double loglik_eta(Family family, const Vec& y, const Vec& eta, double theta) {
  double ll = 0.0;
  switch (family) {
    case Family::Logistic:
      for (Idx i = 0; i < y.size(); ++i) ll += y(i) * eta(i) - softplus(eta(i));
      return ll;
    case Family::NegBin:
      for (Idx i = 0; i < y.size(); ++i) ll += negbin_term(y(i), std::exp(eta(i)), theta);
      return ll;
    case Family::Gaussian: {
      const double n = static_cast<double>(y.size());
      const double sigma2 = (y - eta).squaredNorm() / n;
      return -0.5 * n * (std::log(2.0 * M_PI * sigma2) + 1.0);
    }
  }
  return ll;
}

// Score residual r such that the score is X' r, and the Newton weight.
void residual_and_weight(Family family, const Vec& y, const Vec& mu, double theta, Vec& r, Vec& w) {
  r.resize(y.size());
  w.resize(y.size());
  for (Idx i = 0; i < y.size(); ++i) {
    switch (family) {
      case Family::Logistic:
        r(i) = y(i) - mu(i);
        w(i) = mu(i) * (1.0 - mu(i));
        break;
      case Family::NegBin:
        if (std::isinf(theta)) {
          r(i) = y(i) - mu(i);
          w(i) = mu(i);
        } else {
          const double denom = theta + mu(i);
          r(i) = theta * (y(i) - mu(i)) / denom;
          w(i) = mu(i) * theta * (theta + y(i)) / (denom * denom);
        }
        break;
      case Family::Gaussian:
        r(i) = y(i) - mu(i);
        w(i) = 1.0;
        break;
    }
  }
}

double max_abs_active(const Vec& g, const std::vector<bool>& aliased) {
  double m = 0.0;
  for (Idx j = 0; j < g.size(); ++j) {
    if (!aliased[static_cast<std::size_t>(j)]) m = std::max(m, std::abs(g(j)));
  }
  return m;
}

struct NewtonState {
  Vec params;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  double max_abs_score = 0.0;
};

// Newton-Raphson on the mean parameters with step halving.
NewtonState newton(const Design& d, Family family, double theta, Vec params, const FitOptions& options, int max_iterations) {
  NewtonState s;
  Vec eta = d.linear_predictor(params);
  double ll = loglik_eta(family, d.response, eta, theta);
  Vec r, w;
  for (int it = 0; it < max_iterations; ++it) {
    const Vec mu = mean_of(family, eta);
    residual_and_weight(family, d.response, mu, theta, r, w);
    const Vec g = detail::cross_product(d, r);
    s.max_abs_score = max_abs_active(g, d.aliased);
    if (s.max_abs_score < options.score_tolerance) {
      s.converged = true;
      break;
    }
    const detail::NormalEquations system(d, w);
    const Vec step = system.solve(g);
    double factor = 1.0;
    Vec trial;
    Vec trial_eta;
    double trial_ll = -kInf;
    for (int halving = 0; halving < 40; ++halving) {
      trial = params + factor * step;
      trial_eta = d.linear_predictor(trial);
      trial_ll = loglik_eta(family, d.response, trial_eta, theta);
      if (std::isfinite(trial_ll) && trial_ll >= ll - 1e-12 * std::abs(ll)) break;
      factor *= 0.5;
    }
    s.iterations = it + 1;
    if (!std::isfinite(trial_ll)) break;
    const double change = std::abs(trial_ll - ll) / std::max(std::abs(ll), 1e-300);
    params = std::move(trial);
    eta = std::move(trial_eta);
    ll = trial_ll;
    if (change < options.loglik_tolerance) {
      const Vec mu2 = mean_of(family, eta);
      residual_and_weight(family, d.response, mu2, theta, r, w);
      s.max_abs_score = max_abs_active(detail::cross_product(d, r), d.aliased);
      s.converged = true;
      break;
    }
  }
  s.params = std::move(params);
  s.loglik = ll;
  return s;
}

Vec start_params(const Design& d, Family family) {
  Vec p = Vec::Zero(static_cast<Idx>(d.n_params()));
  const double ybar = d.response.mean();
  switch (family) {
    case Family::Logistic: p(0) = std::log(ybar / (1.0 - ybar)); break;
    case Family::NegBin: p(0) = std::log(std::max(ybar, 1e-8)); break;
    case Family::Gaussian: p(0) = ybar; break;
  }
  if (d.aliased[0]) p(0) = 0.0;
  return p;
}

// d2l/dtheta2 for NB2.
double theta_hessian(const Vec& y, const Vec& mu, double theta) {
  double h = 0.0;
  for (Idx i = 0; i < y.size(); ++i) {
    const double denom = theta + mu(i);
    h += boost::math::trigamma(y(i) + theta) - boost::math::trigamma(theta) + 1.0 / theta - 2.0 / denom +
         (y(i) + theta) / (denom * denom);
  }
  return h;
}

double theta_score_mu(const Vec& y, const Vec& mu, double theta) {
  double g = 0.0;
  for (Idx i = 0; i < y.size(); ++i) {
    const double denom = theta + mu(i);
    g += boost::math::digamma(y(i) + theta) - boost::math::digamma(theta) + std::log(theta / denom) + 1.0 -
         (y(i) + theta) / denom;
  }
  return g;
}

double negbin_loglik_mu(const Vec& y, const Vec& mu, double theta) {
  double ll = 0.0;
  for (Idx i = 0; i < y.size(); ++i) ll += negbin_term(y(i), mu(i), theta);
  return ll;
}

struct ThetaStep {
  double theta;
  double loglik;
  bool boundary;
};

// One safeguarded Newton step on log(theta) holding the means fixed.
ThetaStep update_theta(const Vec& y, const Vec& mu, double theta) {
  const double ll = negbin_loglik_mu(y, mu, theta);
  const double g = theta * theta_score_mu(y, mu, theta);
  const double h = theta * theta * theta_hessian(y, mu, theta) + g;
  double step = h < 0.0 ? -g / h : (g > 0.0 ? 1.0 : -1.0);
  step = std::clamp(step, -3.0, 3.0);
  for (int halving = 0; halving < 40; ++halving) {
    const double candidate = theta * std::exp(step);
    if (candidate > kThetaBoundary) return {kInf, negbin_loglik_mu(y, mu, kInf), true};
    const double cll = negbin_loglik_mu(y, mu, candidate);
    if (std::isfinite(cll) && cll >= ll - 1e-12 * std::abs(ll)) return {candidate, cll, false};
    step *= 0.5;
  }
  return {theta, ll, false};
}

double moment_theta(const Vec& y) {
  const double m = y.mean();
  const double v = (y.array() - m).square().sum() / std::max<double>(1.0, static_cast<double>(y.size()) - 1.0);
  if (v > m * 1.0001 && m > 0.0) return std::clamp(m * m / (v - m), 1e-3, 1e6);
  return 10.0;
}

// Intercept-only NB2 on the same rows: the mean is ybar, theta by 1-D ML.
double negbin_null_loglik(const Vec& y, std::optional<double> fixed_theta) {
  const Vec mu = Vec::Constant(y.size(), std::max(y.mean(), 1e-12));
  if (fixed_theta) return negbin_loglik_mu(y, mu, *fixed_theta);
  double theta = moment_theta(y);
  double ll = negbin_loglik_mu(y, mu, theta);
  for (int it = 0; it < 200; ++it) {
    const ThetaStep next = update_theta(y, mu, theta);
    const double change = std::abs(next.loglik - ll) / std::max(std::abs(ll), 1e-300);
    theta = next.theta;
    ll = next.loglik;
    if (next.boundary || change < 1e-12) break;
  }
  return ll;
}

Eigen::MatrixXd inverse_dense_rows(const Design& d, const Vec& weights) {
  // Rows of H^{-1} belonging to the dense coefficients (q x P).
  const detail::NormalEquations system(d, weights);
  const auto q = static_cast<Idx>(d.n_dense());
  const auto p = static_cast<Idx>(d.n_params());
  Eigen::MatrixXd rows(q, p);
  for (Idx j = 0; j < q; ++j) {
    Vec e = Vec::Zero(p);
    if (!d.aliased[static_cast<std::size_t>(j)]) {
      e(j) = 1.0;
      rows.row(j) = system.solve(e).transpose();
    } else {
      rows.row(j).setZero();
    }
  }
  return rows;
}

Vec newton_weights(const Design& d, const FitResult& fit) {
  Vec r, w;
  residual_and_weight(fit.family, d.response, fit.fitted, fit.theta, r, w);
  return w;
}

Vec score_residuals(const Design& d, const FitResult& fit) {
  Vec r, w;
  residual_and_weight(fit.family, d.response, fit.fitted, fit.theta, r, w);
  return r;
}

void mark_aliased(const Design& d, Eigen::MatrixXd& v) {
  for (std::size_t j = 0; j < d.n_dense(); ++j) {
    if (!d.aliased[j]) continue;
    v.row(static_cast<Idx>(j)).setConstant(kNaN);
    v.col(static_cast<Idx>(j)).setConstant(kNaN);
  }
}

void finish(const Design& d, FitResult& r, Vec params, double loglik, double null_loglik, std::size_t extra_params) {
  r.spec = d.spec;
  r.params = std::move(params);
  for (std::size_t j = 0; j < d.n_params(); ++j) {
    if (d.aliased[j]) r.params(static_cast<Idx>(j)) = 0.0;
  }
  r.coefficients = r.params.head(static_cast<Idx>(d.n_dense()));
  for (std::size_t j = 0; j < d.n_dense(); ++j) {
    if (d.aliased[j]) r.coefficients(static_cast<Idx>(j)) = kNaN;
  }
  r.names.clear();
  for (const auto& c : d.columns) r.names.push_back(c.name);
  r.fitted = mean_of(r.family, d.linear_predictor(r.params));
  r.loglik = loglik;
  r.null_loglik = null_loglik;
  r.n_used = d.n();
  r.n_dropped_separation = d.n_dropped_separation;
  r.n_dropped_missing = d.n_dropped_missing;
  r.n_parameters = d.n_estimated() + extra_params;
  const FitStatistics stats = fit_statistics(loglik, null_loglik, r.n_parameters, r.n_used);
  r.pseudo_r2 = stats.pseudo_r2;
  r.aic = stats.aic;
  r.bic = stats.bic;
}

[[noreturn]] void throw_nonconvergence(const std::string& what, int iterations, double score) {
  throw estimation_error("NonConvergence", what + " did not converge after " + std::to_string(iterations) +
                                               " iterations (max |score| = " + std::to_string(score) + ")");
}

}  // namespace

// --- FitResult --------------------------------------------------------------

Vec FitResult::std_errors() const {
  Vec se(vcov.rows());
  for (Idx j = 0; j < vcov.rows(); ++j) se(j) = vcov(j, j) >= 0.0 ? std::sqrt(vcov(j, j)) : kNaN;
  return se;
}

int FitResult::coefficient_index(const std::string& name) const {
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (names[j] == name) return static_cast<int>(j);
  }
  return -1;
}

// --- likelihood -------------------------------------------------------------

double log_likelihood(const Design& d, Family family, const Vec& params, double theta) {
  return loglik_eta(family, d.response, d.linear_predictor(params), theta);
}

Vec score(const Design& d, Family family, const Vec& params, double theta) {
  const Vec eta = d.linear_predictor(params);
  const Vec mu = mean_of(family, eta);
  Vec r, w;
  residual_and_weight(family, d.response, mu, theta, r, w);
  if (family == Family::Gaussian) {
    const double sigma2 = (d.response - eta).squaredNorm() / static_cast<double>(d.n());
    r /= sigma2;
  }
  return detail::cross_product(d, r);
}

double theta_score(const Design& d, const Vec& params, double theta) {
  return theta_score_mu(d.response, mean_of(Family::NegBin, d.linear_predictor(params)), theta);
}

// --- fits -------------------------------------------------------------------

FitResult fit_logistic(const Design& d, const FitOptions& options) {
  FitResult r;
  r.family = Family::Logistic;
  const double ybar = d.response.mean();
  if (ybar <= 0.0 || ybar >= 1.0) throw validation_error("ConstantResponse", "logistic response has no variation");
  const NewtonState s = newton(d, Family::Logistic, 1.0, start_params(d, Family::Logistic), options, options.max_iterations);
  r.iterations = s.iterations;
  r.max_abs_score = s.max_abs_score;
  r.converged = s.converged;

  const Vec mu = mean_of(Family::Logistic, d.linear_predictor(s.params));
  const bool extreme = ((mu.array() > 1.0 - 1e-10) || (mu.array() < 1e-10)).any();
  double largest = 0.0;
  for (std::size_t j = 0; j < d.n_params(); ++j) {
    if (!d.aliased[j]) largest = std::max(largest, std::abs(s.params(static_cast<Idx>(j))));
  }
  if (extreme && largest > 15.0) {
    throw estimation_error("PerfectSeparation", "fitted probabilities reach 0 or 1 with diverging coefficients");
  }
  if (!s.converged) throw_nonconvergence("logistic fit", s.iterations, s.max_abs_score);

  const double n = static_cast<double>(d.n());
  const double null_ll = n * (ybar * std::log(ybar) + (1.0 - ybar) * std::log1p(-ybar));
  finish(d, r, s.params, s.loglik, null_ll, 0);
  return r;
}

FitResult fit_negbin(const Design& d, const FitOptions& options) {
  FitResult r;
  r.family = Family::NegBin;
  if (!(d.response.maxCoeff() > 0.0)) throw validation_error("ConstantResponse", "count response is identically zero");

  double theta = options.fixed_theta ? *options.fixed_theta : moment_theta(d.response);
  if (!(theta > 0.0)) throw validation_error("InvalidDispersion", "dispersion must be positive");
  bool boundary = std::isinf(theta) && !options.fixed_theta;

  Vec params = start_params(d, Family::NegBin);
  NewtonState s;
  double ll = -kInf;
  bool converged = false;
  int total_iterations = 0;
  double theta_gradient = 0.0;
  for (int outer = 0; outer < options.max_iterations; ++outer) {
    s = newton(d, Family::NegBin, theta, params, options, options.max_iterations);
    total_iterations += s.iterations;
    params = s.params;
    if (!s.converged) break;
    if (options.fixed_theta || boundary) {
      ll = s.loglik;
      converged = true;
      break;
    }
    const Vec mu = mean_of(Family::NegBin, d.linear_predictor(params));
    theta_gradient = theta * theta_score_mu(d.response, mu, theta);
    const ThetaStep next = update_theta(d.response, mu, theta);
    const double change = std::abs(next.loglik - ll) / std::max(std::abs(next.loglik), 1e-300);
    const double previous = ll;
    theta = next.theta;
    ll = next.loglik;
    if (next.boundary) {
      boundary = true;
      continue;  // refit the mean under the Poisson limit
    }
    if (std::abs(theta_gradient) < options.score_tolerance ||
        (std::isfinite(previous) && change < options.loglik_tolerance)) {
      s = newton(d, Family::NegBin, theta, params, options, options.max_iterations);
      total_iterations += s.iterations;
      params = s.params;
      ll = s.loglik;
      converged = s.converged;
      break;
    }
  }
  r.iterations = total_iterations;
  r.max_abs_score = std::max(s.max_abs_score, std::abs(theta_gradient));
  if (!converged) throw_nonconvergence("negative binomial fit", total_iterations, r.max_abs_score);
  r.converged = true;
  r.theta = theta;
  r.dispersion_boundary = boundary;

  const Vec mu = mean_of(Family::NegBin, d.linear_predictor(params));
  if (std::isfinite(theta) && !options.fixed_theta) {
    const double h = theta_hessian(d.response, mu, theta);
    r.theta_se = h < 0.0 ? std::sqrt(-1.0 / h) : kNaN;
  }
  const double null_ll = negbin_null_loglik(d.response, options.fixed_theta ? options.fixed_theta : (boundary ? std::optional<double>(kInf) : std::nullopt));
  const std::size_t extra = (options.fixed_theta || boundary) ? 0 : 1;
  finish(d, r, params, ll, null_ll, extra);
  return r;
}

FitResult fit_ols(const Design& d, const FitOptions&) {
  FitResult r;
  r.family = Family::Gaussian;
  const Vec ones = Vec::Ones(static_cast<Idx>(d.n()));
  const detail::NormalEquations system(d, ones);
  const Vec params = system.solve(detail::cross_product(d, d.response));
  const Vec eta = d.linear_predictor(params);
  const double n = static_cast<double>(d.n());
  const double rss = (d.response - eta).squaredNorm();
  const double tss = (d.response.array() - d.response.mean()).square().sum();
  const double ll = rss > 0.0 ? -0.5 * n * (std::log(2.0 * M_PI * rss / n) + 1.0) : kInf;
  const double null_ll = tss > 0.0 ? -0.5 * n * (std::log(2.0 * M_PI * tss / n) + 1.0) : kInf;
  r.converged = true;
  r.iterations = 1;
  finish(d, r, params, ll, null_ll, 1);
  r.r_squared = tss > 0.0 ? 1.0 - rss / tss : 0.0;
  if (!std::isfinite(ll) || !std::isfinite(null_ll)) r.pseudo_r2 = kNaN;
  Vec res = d.response - eta;
  r.max_abs_score = max_abs_active(detail::cross_product(d, res), d.aliased);
  return r;
}

FitResult fit(const Design& d, const FitOptions& options) {
  FitResult r;
  switch (d.spec.family) {
    case Family::Logistic: r = fit_logistic(d, options); break;
    case Family::NegBin: r = fit_negbin(d, options); break;
    case Family::Gaussian: r = fit_ols(d, options); break;
  }
  if (d.clusters.empty()) {
    r.vcov = model_vcov(d, r);
    r.vcov_type = "model";
  } else {
    const ClusterVcov cv = clustered_vcov(d, r, d.clusters);
    r.vcov = cv.vcov;
    r.vcov_floored = cv.floored;
    r.n_clusters = cv.n_clusters;
    r.vcov_type = d.clusters.size() == 1 ? "cluster:" + d.spec.clusters[0]
                                         : "cluster:" + d.spec.clusters[0] + "+" + d.spec.clusters[1];
  }
  return r;
}

// --- covariance -------------------------------------------------------------

Eigen::MatrixXd model_vcov(const Design& d, const FitResult& fit) {
  const Eigen::MatrixXd rows = inverse_dense_rows(d, newton_weights(d, fit));
  const auto q = static_cast<Idx>(d.n_dense());
  Eigen::MatrixXd v = rows.leftCols(q);
  if (fit.family == Family::Gaussian) {
    const double dof = static_cast<double>(d.n()) - static_cast<double>(d.n_estimated());
    const double rss = (d.response - fit.fitted).squaredNorm();
    v *= dof > 0.0 ? rss / dof : kNaN;
  }
  v = 0.5 * (v + v.transpose()).eval();
  mark_aliased(d, v);
  return v;
}

namespace {

// Cluster-summed influence contributions restricted to the dense block.
Eigen::MatrixXd oneway_meat(const Eigen::MatrixXd& u, const std::vector<int>& ids, std::size_t& groups) {
  const int g = ids.empty() ? 0 : *std::max_element(ids.begin(), ids.end()) + 1;
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(g, u.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) sums.row(ids[i]) += u.row(static_cast<Idx>(i));
  groups = static_cast<std::size_t>(g);
  if (g < 2) throw validation_error("TooFewClusters", "clustering needs at least 2 clusters");
  const double scale = static_cast<double>(g) / static_cast<double>(g - 1);
  return scale * (sums.transpose() * sums);
}

}  // namespace

ClusterVcov clustered_vcov(const Design& d, const FitResult& fit, std::span<const std::vector<int>> clusters) {
  if (clusters.empty() || clusters.size() > 2) throw validation_error("InvalidClusters", "one or two cluster dimensions are supported");
  for (const auto& ids : clusters) {
    if (ids.size() != d.n()) throw validation_error("ShapeMismatch", "cluster ids do not match design rows");
  }
  const Eigen::MatrixXd rows = inverse_dense_rows(d, newton_weights(d, fit));
  const Vec res = score_residuals(d, fit);
  const auto q = static_cast<Idx>(d.n_dense());
  const auto n = static_cast<Idx>(d.n());

  // u_i = r_i * (H^{-1} x_i) on the dense block.
  Eigen::MatrixXd u(n, q);
  for (Idx i = 0; i < n; ++i) {
    Vec ui = rows.leftCols(q) * d.dense.row(i).transpose();
    for (std::size_t f = 0; f < d.factors.size(); ++f) {
      const int level = d.factors[f].index[static_cast<std::size_t>(i)];
      if (level > 0) ui += rows.col(static_cast<Idx>(d.factor_offset(f) + static_cast<std::size_t>(level) - 1));
    }
    u.row(i) = res(i) * ui.transpose();
  }

  ClusterVcov out;
  std::size_t groups = 0;
  out.vcov = oneway_meat(u, clusters[0], groups);
  out.n_clusters.push_back(groups);
  if (clusters.size() == 2) {
    out.vcov += oneway_meat(u, clusters[1], groups);
    out.n_clusters.push_back(groups);
    std::map<std::pair<int, int>, int> joint;
    std::vector<int> ids(d.n());
    for (std::size_t i = 0; i < d.n(); ++i) {
      auto [it, inserted] = joint.emplace(std::make_pair(clusters[0][i], clusters[1][i]), static_cast<int>(joint.size()));
      ids[i] = it->second;
    }
    std::size_t joint_groups = 0;
    const int g = static_cast<int>(joint.size());
    if (g >= 2) {
      out.vcov -= oneway_meat(u, ids, joint_groups);
    }
    out.vcov = 0.5 * (out.vcov + out.vcov.transpose()).eval();

    std::vector<Idx> active;
    for (Idx j = 0; j < q; ++j) {
      if (!d.aliased[static_cast<std::size_t>(j)]) active.push_back(j);
    }
    Eigen::MatrixXd sub(active.size(), active.size());
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = 0; b < active.size(); ++b) sub(static_cast<Idx>(a), static_cast<Idx>(b)) = out.vcov(active[a], active[b]);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sub);
    if (eig.eigenvalues().size() > 0 && eig.eigenvalues().minCoeff() < 0.0) {
      out.floored = true;
      const Vec floored = eig.eigenvalues().cwiseMax(0.0);
      sub = eig.eigenvectors() * floored.asDiagonal() * eig.eigenvectors().transpose();
      for (std::size_t a = 0; a < active.size(); ++a) {
        for (std::size_t b = 0; b < active.size(); ++b) out.vcov(active[a], active[b]) = sub(static_cast<Idx>(a), static_cast<Idx>(b));
      }
    }
  }
  out.vcov = 0.5 * (out.vcov + out.vcov.transpose()).eval();
  mark_aliased(d, out.vcov);
  return out;
}

FitStatistics fit_statistics(double loglik, double null_loglik, std::size_t n_parameters, std::size_t n) {
  FitStatistics s{};
  s.pseudo_r2 = null_loglik != 0.0 ? 1.0 - loglik / null_loglik : 0.0;
  const double p = static_cast<double>(n_parameters);
  s.aic = 2.0 * p - 2.0 * loglik;
  s.bic = p * std::log(static_cast<double>(n)) - 2.0 * loglik;
  return s;
}

// --- marginal effects -------------------------------------------------------

AmeKind parse_ame_kind(const std::string& name) {
  if (name == "binary01") return AmeKind::Binary01;
  if (name == "sd_increase" || name == "sd") return AmeKind::SdIncrease;
  if (name == "unit") return AmeKind::Unit;
  throw validation_error("UnknownAmeKind", "unknown marginal-effect kind '" + name + "'");
}

namespace {

double mean_response(const Design& d, const FitResult& fit, const Eigen::MatrixXd& dense) {
  return mean_of(fit.family, d.linear_predictor(fit.params, dense)).mean();
}

std::size_t require_source(const Design& d, const std::string& variable) {
  const int s = d.source_index(variable);
  if (s < 0) throw validation_error("UnknownVariable", "variable '" + variable + "' is not in the model");
  return static_cast<std::size_t>(s);
}

}  // namespace

MarginalEffect average_marginal_effect(const Design& d, const FitResult& fit, const std::string& variable, AmeKind kind) {
  const std::size_t s = require_source(d, variable);
  MarginalEffect me;
  me.variable = variable;
  switch (kind) {
    case AmeKind::Binary01: {
      me.step = 1.0;
      const double one = mean_response(d, fit, d.dense_with(s, [](double) { return 1.0; }));
      const double zero = mean_response(d, fit, d.dense_with(s, [](double) { return 0.0; }));
      me.effect = one - zero;
      return me;
    }
    case AmeKind::SdIncrease:
    case AmeKind::Unit: {
      const auto column = d.raw.col(static_cast<Idx>(s));
      if (kind == AmeKind::SdIncrease) {
        const double mean = column.mean();
        const double n = static_cast<double>(column.size());
        me.step = n > 1.0 ? std::sqrt((column.array() - mean).square().sum() / (n - 1.0)) : 0.0;
      } else {
        me.step = 1.0;
      }
      const double step = me.step;
      const double shifted = mean_response(d, fit, d.dense_with(s, [step](double v) { return v + step; }));
      const double base = mean_response(d, fit, d.dense);
      me.effect = shifted - base;
      return me;
    }
  }
  return me;
}

MarginalEffect counterfactual_count_ame(const Design& d, const FitResult& fit, const std::string& variable, CountDelta delta) {
  const std::size_t s = require_source(d, variable);
  MarginalEffect me;
  me.variable = variable;
  me.step = delta == CountDelta::PlusOne ? 1.0 : 0.01;
  const auto perturb = delta == CountDelta::PlusOne ? std::function<double(double)>([](double v) { return v + 1.0; })
                                                    : std::function<double(double)>([](double v) { return v * 1.01; });
  me.effect = mean_response(d, fit, d.dense_with(s, perturb)) - mean_response(d, fit, d.dense);
  return me;
}

double normal_p_value(double z) {
  if (!std::isfinite(z)) return std::isnan(z) ? kNaN : 0.0;
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

std::string stars(double p) {
  if (std::isnan(p)) return "";
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.1) return "*";
  return "";
}

// --- JSON -------------------------------------------------------------------

namespace {

nlohmann::ordered_json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double from_number(const nlohmann::json& j) {
  if (j.is_null()) return kNaN;
  if (j.is_string()) return j.get<std::string>() == "-inf" ? -kInf : kInf;
  return j.get<double>();
}

}  // namespace

nlohmann::ordered_json to_json(const FitResult& fit, const Design& d) {
  nlohmann::ordered_json j;
  j["spec"] = to_json(fit.spec);
  j["family"] = to_string(fit.family);
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["max_abs_score"] = number(fit.max_abs_score);
  j["n"] = fit.n_used;
  j["n_input"] = d.n_input;
  j["n_dropped_missing"] = fit.n_dropped_missing;
  j["n_dropped_separation"] = fit.n_dropped_separation;
  j["n_parameters"] = fit.n_parameters;
  j["loglik"] = number(fit.loglik);
  j["null_loglik"] = number(fit.null_loglik);
  j["pseudo_r2"] = number(fit.pseudo_r2);
  j["pseudo_r2_variant"] = "mcfadden";
  j["aic"] = number(fit.aic);
  j["bic"] = number(fit.bic);
  if (fit.family == Family::Gaussian) j["r_squared"] = number(fit.r_squared);
  if (fit.family == Family::NegBin) {
    j["theta"] = number(fit.theta);
    j["theta_se"] = number(fit.theta_se);
    j["dispersion_boundary"] = fit.dispersion_boundary;
  }
  j["vcov_type"] = fit.vcov_type;
  j["vcov_floored"] = fit.vcov_floored;
  j["n_clusters"] = fit.n_clusters;

  const Vec se = fit.std_errors();
  auto& coefs = j["coefficients"] = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < fit.names.size(); ++k) {
    const double b = fit.coefficients(static_cast<Idx>(k));
    const double s = se(static_cast<Idx>(k));
    const double z = b / s;
    const double p = normal_p_value(z);
    coefs.push_back({{"name", fit.names[k]},
                     {"estimate", number(b)},
                     {"std_error", number(s)},
                     {"z", number(z)},
                     {"p_value", number(p)},
                     {"stars", stars(p)},
                     {"aliased", static_cast<bool>(d.aliased[k])}});
  }
  auto& vc = j["vcov"] = nlohmann::ordered_json::array();
  for (Idx a = 0; a < fit.vcov.rows(); ++a) {
    auto row = nlohmann::ordered_json::array();
    for (Idx b = 0; b < fit.vcov.cols(); ++b) row.push_back(number(fit.vcov(a, b)));
    vc.push_back(std::move(row));
  }
  auto& fe = j["fixed_effects"] = nlohmann::ordered_json::array();
  for (std::size_t f = 0; f < d.factors.size(); ++f) {
    const auto& block = d.factors[f];
    nlohmann::ordered_json levels = nlohmann::ordered_json::object();
    const std::size_t off = d.factor_offset(f);
    for (std::size_t l = 1; l < block.levels.size(); ++l) {
      levels[block.levels[l]] = d.aliased[off + l - 1] ? nlohmann::ordered_json(nullptr) : number(fit.params(static_cast<Idx>(off + l - 1)));
    }
    fe.push_back({{"factor", block.name}, {"reference", block.levels.empty() ? "" : block.levels[0]}, {"levels", std::move(levels)}});
  }
  return j;
}

FitResult fit_from_json(const nlohmann::json& j, const Design& d) {
  try {
    FitResult r;
    r.family = parse_family(j.at("family").get<std::string>());
    r.spec = d.spec;
    r.params = Vec::Zero(static_cast<Idx>(d.n_params()));
    const auto& coefs = j.at("coefficients");
    if (coefs.size() != d.n_dense()) throw validation_error("UnknownParameter", "coefficient count does not match the design");
    for (std::size_t k = 0; k < d.n_dense(); ++k) {
      if (coefs[k].at("name").get<std::string>() != d.columns[k].name) {
        throw validation_error("UnknownParameter", "coefficient '" + coefs[k].at("name").get<std::string>() + "' does not match the design");
      }
      const double b = from_number(coefs[k].at("estimate"));
      r.params(static_cast<Idx>(k)) = std::isnan(b) ? 0.0 : b;
      r.names.push_back(d.columns[k].name);
    }
    const auto& fe = j.at("fixed_effects");
    if (fe.size() != d.factors.size()) throw validation_error("UnknownParameter", "fixed-effect factors do not match the design");
    for (std::size_t f = 0; f < d.factors.size(); ++f) {
      const auto& block = d.factors[f];
      const auto& levels = fe[f].at("levels");
      const std::size_t off = d.factor_offset(f);
      for (std::size_t l = 1; l < block.levels.size(); ++l) {
        if (!levels.contains(block.levels[l])) {
          throw validation_error("UnknownParameter", "level '" + block.levels[l] + "' of " + block.name + " missing from fit");
        }
        const double v = from_number(levels.at(block.levels[l]));
        r.params(static_cast<Idx>(off + l - 1)) = std::isnan(v) ? 0.0 : v;
      }
    }
    r.coefficients = r.params.head(static_cast<Idx>(d.n_dense()));
    if (j.contains("theta")) r.theta = from_number(j.at("theta"));
    r.fitted = mean_of(r.family, d.linear_predictor(r.params));
    r.converged = j.value("converged", false);
    r.n_used = d.n();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw validation_error("InvalidFit", e.what());
  }
}

}  // namespace agglomer
