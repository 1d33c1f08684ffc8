#include "gsvcm/penalties.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace gsvcm;

TEST_CASE("deviation") {
  CHECK(deviation(Vector::Constant(7, 2.5)) == 0.0);
  Vector v(3);
  v << 1, 2, 3;
  CHECK(std::abs(deviation(v) - std::sqrt(2.0)) < 1e-12);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(3.0, 2.0);
  for (int t = 0; t < 20; ++t) {
    Vector r(50);
    for (Index i = 0; i < 50; ++i) r[i] = z(rng);
    CHECK(std::abs(deviation(r) - oracle::two_pass_deviation(r)) < 1e-12);
  }
  CHECK_THROWS_AS(deviation(Vector()), Error);
}

TEST_CASE("scad_derivative branches") {
  CHECK(std::abs(scad_derivative(0.5, 1.0, 3.7) - 1.0) < 1e-12);
  CHECK(std::abs(scad_derivative(3.7, 1.0, 3.7)) < 1e-12);
  CHECK(std::abs(scad_derivative(2.0, 1.0, 3.7) - 1.7 / 2.7) < 1e-12);
  CHECK(std::abs(scad_derivative(2.0, 1.0, 3.7) - 0.62963) < 1e-5);
  CHECK(scad_derivative(10.0, 1.0, 3.7) == 0.0);
}

TEST_CASE("scad_derivative is continuous and nonincreasing") {
  const double lambda = 0.7, a0 = 3.7;
  double prev = scad_derivative(0.0, lambda, a0);
  for (int i = 1; i <= 1000; ++i) {
    const double z = 4.0 * i / 1000.0;
    const double v = scad_derivative(z, lambda, a0);
    CHECK(v <= prev + 1e-15);
    CHECK(prev - v <= lambda / ((a0 - 1.0) * lambda) * 0.004 + 1e-12);
    CHECK(v >= 0.0);
    prev = v;
  }
}

TEST_CASE("SCAD weights on the plateau are zero") {
  Matrix alpha(4, 2);
  alpha.col(0) << 2, 2, 2, 2;      // norm 4 >= 3.7 * 1
  alpha.col(1) << 0.1, 0.2, 0.1, 0;
  const auto w = compute_weights(PenaltySpec::group_scad(1.0, 1.0), alpha, 0.5);
  CHECK(w.tau1[0] == 0.0);
  CHECK(w.tau1[1] == 1.0);
  CHECK(w.tau2[0] == 1.0);  // deviation 0 <= lambda*
  CHECK_FALSE(w.frozen);
}

TEST_CASE("adaptive weights") {
  Matrix alpha = Matrix::Zero(4, 2);
  alpha.col(1) << 2, 2, 2, 2;
  const auto w = compute_weights(PenaltySpec::adaptive_group_lasso(0.2, 0.3), alpha, 0.5);
  CHECK(is_pinned(w.tau1[0]));
  CHECK(is_pinned(w.tau2[0]));
  CHECK(std::abs(w.tau1[1] - 0.05) < 1e-15);
  CHECK(is_pinned(w.tau2[1]));  // constant column has zero deviation
  CHECK(w.frozen);

  alpha.col(0) << 1, 2, 3, 4;
  const auto w2 = compute_weights(PenaltySpec::adaptive_group_lasso(0.2, 0.3, 2), alpha, 0.5);
  CHECK(std::abs(w2.tau1[0] - 0.2 / 30.0) < 1e-15);
  CHECK(std::abs(w2.tau2[0] - 0.3 / 5.0) < 1e-15);
}
