#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "agglomer/concentration.hpp"
#include "agglomer/error.hpp"
#include "agglomer/relatedness.hpp"
#include "agglomer/spatial.hpp"
#include "agglomer/specialization.hpp"

using namespace agglomer;
using doctest::Approx;

namespace {

SpecializationMatrix cells(std::initializer_list<std::initializer_list<int>> rows) {
  BinaryMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index k = 0;
    for (int v : r) m(i, k++) = v;
    ++i;
  }
  return make_specialization(m);
}

}  // namespace

TEST_CASE("entropy examples") {
  std::vector<std::int64_t> uniform{1, 1, 1, 1}, single{7}, skew{3, 1}, none{0, 0};
  CHECK(entropy(uniform) == Approx(2.0));
  CHECK(entropy(single) == 0.0);
  CHECK(entropy(skew) == Approx(0.811278).epsilon(1e-6));
  CHECK_THROWS_AS(entropy(none), Error);
  CHECK(effective_places(2.0) == Approx(4.0));
  CHECK(effective_places(0.0) == 1.0);
}

TEST_CASE("entropy is permutation and scale invariant") {
  std::vector<std::int64_t> a{5, 0, 2, 9, 1}, b{9, 1, 5, 2, 0}, c{15, 0, 6, 27, 3};
  CHECK(entropy(a) == Approx(entropy(b)).epsilon(1e-14));
  CHECK(entropy(a) == Approx(entropy(c)).epsilon(1e-14));
}

TEST_CASE("concentration series skips one-sided centuries") {
  CountTensor n({"A", "B"}, {"x"});
  n.add(0, 0, Century{12}, Role::Births, 2);
  n.add(1, 0, Century{12}, Role::Births, 2);
  n.add(0, 0, Century{12}, Role::Deaths, 4);
  n.add(0, 0, Century{13}, Role::Births, 1);
  const auto rows = concentration_series(n);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].century.value == 12);
  CHECK(rows[0].entropy_births == Approx(1.0));
  CHECK(rows[0].effective_deaths == Approx(1.0));
}

TEST_CASE("naive expectation and ratio") {
  Eigen::MatrixXd n(2, 2);
  n << 4, 0, 0, 1;
  const Eigen::MatrixXd e = expected_naive(n);
  CHECK(e(0, 0) == Approx(3.2));
  CHECK(e(0, 1) == Approx(0.8));
  CHECK(e(1, 0) == Approx(0.8));
  CHECK(e(1, 1) == Approx(0.2));
  const Eigen::MatrixXd r = rca_ratio(n, e);
  CHECK(r(0, 0) == Approx(1.25));
  CHECK(r(0, 1) == 0.0);
  CHECK(r(1, 1) == Approx(5.0));

  Eigen::MatrixXd single = Eigen::MatrixXd::Zero(2, 3);
  single(0, 0) = 5;
  CHECK(expected_naive(single)(0, 0) == Approx(5.0));
  const Eigen::MatrixXd uniform = Eigen::MatrixXd::Constant(3, 4, 2.0);
  CHECK((expected_naive(uniform).array() - 2.0).abs().maxCoeff() < 1e-12);
  CHECK(binarize(rca_ratio(uniform, expected_naive(uniform))).diversity(0) == 4);

  CHECK_THROWS_AS(expected_naive(Eigen::MatrixXd::Zero(2, 2)), Error);
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(1, 2), bad(1, 2);
  bad << 1, 0;
  CHECK(rca_ratio(zero, zero)(0, 0) == 0.0);
  CHECK_THROWS_AS(rca_ratio(bad, zero), Error);
}

TEST_CASE("binarize threshold is inclusive") {
  Eigen::MatrixXd r(1, 2);
  r << 1.0, 0.999;
  const auto m = binarize(r);
  CHECK(m.cells(0, 0) == 1);
  CHECK(m.cells(0, 1) == 0);
}

TEST_CASE("joint ratio") {
  Eigen::MatrixXd b(2, 2), d = Eigen::MatrixXd::Zero(2, 2);
  b << 4, 1, 2, 3;
  const Eigen::MatrixXd single = rca_ratio(b, expected_naive(b));
  CHECK((joint_ratio(b, b) - single).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((joint_ratio(b, d) - single).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::MatrixXd d2(2, 2);
  d2 << 1, 1, 0, 5;
  const Eigen::MatrixXd j = joint_ratio(b, d2);
  const Eigen::MatrixXd oracle = (b + d2).array() / (expected_naive(b) + expected_naive(d2)).array();
  CHECK((j - oracle).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("nested sort recovers a triangle") {
  const auto m = cells({{1, 0, 0}, {1, 1, 1}, {1, 1, 0}});
  const auto order = nested_sort(m, {"A", "B", "C"}, {"x", "y", "z"});
  CHECK(order.regions == std::vector<int>{1, 2, 0});
  CHECK(order.activities == std::vector<int>{0, 1, 2});
  const auto identity = nested_sort(cells({{0, 1}, {1, 0}}), {"B", "A"}, {"y", "x"});
  CHECK(identity.regions == std::vector<int>{1, 0});
  CHECK(identity.activities == std::vector<int>{1, 0});
}

TEST_CASE("proximity examples") {
  const auto m = cells({{1, 1, 1, 0}, {1, 0, 1, 1}, {0, 0, 0, 1}});
  const Eigen::MatrixXd phi = proximity(m);
  CHECK(phi(0, 2) == Approx(1.0));  // identical columns
  CHECK(phi(0, 1) == Approx(0.5));  // [1,1,0] vs [1,0,0]
  CHECK(phi(1, 3) == 0.0);          // disjoint
  CHECK((phi - phi.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(proximity(cells({{0, 0}}))(0, 1) == 0.0);
}

TEST_CASE("density examples") {
  Eigen::MatrixXd phi(3, 3);
  phi << 1, 0.5, 0.25, 0.5, 1, 0, 0.25, 0, 1;
  const auto m = cells({{0, 1, 0}, {1, 1, 1}, {0, 0, 0}});
  CHECK(relatedness_density(m, phi, 0, 0) == Approx(100.0 * 0.5 / 1.75));
  CHECK(relatedness_density(m, phi, 0, 0) == Approx(28.571).epsilon(1e-4));
  const auto all = relatedness_density(m, phi);
  CHECK(all.omega.row(1).minCoeff() == Approx(100.0));
  CHECK(all.omega.row(2).maxCoeff() == 0.0);
  CHECK(all.isolated_activities.empty());

  // Without the self term the diagonal drops out of both sums.
  DensityOptions excl{true};
  CHECK(relatedness_density(m, phi, 0, 0, excl) == Approx(100.0 * 0.5 / 0.75));

  Eigen::MatrixXd lonely = Eigen::MatrixXd::Zero(2, 2);
  const auto flagged = relatedness_density(cells({{1, 0}}), lonely);
  CHECK(flagged.omega(0, 0) == 0.0);
  CHECK(flagged.isolated_activities == std::vector<int>{0, 1});
}

TEST_CASE("locals proxy recovers identical densities") {
  std::vector<double> births, emi, locals;
  std::vector<std::string> region, century;
  for (int i = 0; i < 40; ++i) {
    const double b = (i * 37 % 101) * 0.9, e = (i * 53 % 97) * 0.7;
    births.push_back(b);
    emi.push_back(e);
    locals.push_back(b);
    region.push_back("r" + std::to_string(i % 5));
    century.push_back("c" + std::to_string(12 + i % 3));
  }
  const auto same = locals_proxy_fit(locals, births, emi, region, century);
  CHECK(same.births_coefficient == Approx(1.0));
  CHECK(std::abs(same.emigrants_coefficient) < 1e-8);
  CHECK(same.r_squared == Approx(1.0));
  CHECK(same.n == 40);

  for (std::size_t i = 0; i < locals.size(); ++i) locals[i] = 0.6 * births[i] + 0.3 * emi[i] + (region[i] == "r1" ? 4.0 : 0.0);
  const auto mixed = locals_proxy_fit(locals, births, emi, region, century);
  CHECK(mixed.births_coefficient == Approx(0.6));
  CHECK(mixed.emigrants_coefficient == Approx(0.3));
}

TEST_CASE("haversine") {
  RegionRecord a{"A", "", "", 0.0, 0.0}, b{"B", "", "", 0.0, 180.0};
  CHECK(haversine_km(a, a) == 0.0);
  CHECK(haversine_km(a, b) == Approx(std::numbers::pi * kEarthRadiusKm));
  CHECK(haversine_km(a, b) == Approx(20015.1).epsilon(1e-6));
  RegionRecord c{"C", "", "", 48.1, 11.6}, d{"D", "", "", 52.5, 13.4};
  CHECK(haversine_km(c, d) == haversine_km(d, c));
}

TEST_CASE("spatial lags on a line") {
  // Distances 100 and 200 via a weight matrix given directly.
  Eigen::MatrixXd w(3, 3);
  w << 0, 1.0 / 100, 1.0 / 200, 1.0 / 100, 0, 1.0 / 100, 1.0 / 200, 1.0 / 100, 0;
  Eigen::VectorXd m(3);
  m << 0, 1, 0;
  CHECK(spatial_lag_M(w, m)(0) == Approx(2.0 / 3.0));
  Eigen::VectorXd omega(3);
  omega << 0, 40, 10;
  CHECK(spatial_lag_omega(w, omega)(0) == Approx(30.0));
  CHECK(spatial_lag_omega(w, Eigen::VectorXd::Constant(3, 50.0)).maxCoeff() == Approx(50.0));
  CHECK(spatial_lag_M(w, Eigen::VectorXd::Zero(3)).maxCoeff() == 0.0);

  const Eigen::MatrixXd scaled = spatial_lag(w * 7.5, omega);
  CHECK((scaled - spatial_lag(w, omega)).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(spatial_lag(Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Ones(1, 1)), Error);
}

TEST_CASE("inverse distance weights floor coincident centroids") {
  std::vector<RegionRecord> r{{"A", "", "", 10.0, 10.0}, {"B", "", "", 10.0, 10.0}, {"C", "", "", 0.0, 0.0}};
  const WeightMatrix w = inverse_distance_weights(r);
  CHECK(w.coincident_pairs == 1);
  CHECK(w.weights(0, 1) == Approx(1.0));
  CHECK(w.weights(0, 0) == 0.0);
  CHECK(w.weights(0, 2) == Approx(1.0 / haversine_km(r[0], r[2])));
}
