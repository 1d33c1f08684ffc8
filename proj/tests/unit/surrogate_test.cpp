#include "gsvcm/surrogate.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace gsvcm;

namespace {

CoefficientField random_field(Index n, Index d, double h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 0.3);
  CoefficientField f{Matrix(n, d), Matrix(n, d), h};
  for (Index k = 0; k < n; ++k)
    for (Index j = 0; j < d; ++j) {
      f.alpha(k, j) = z(rng);
      f.beta(k, j) = z(rng);
    }
  return f;
}

Matrix field_matrix(const CoefficientField& f) {
  Matrix m(f.n(), 2 * f.d());
  m << f.alpha, f.h * f.beta;
  return m;
}

}  // namespace

TEST_CASE("transform index arithmetic") {
  const Transform one = build_transform(1, 3);
  for (Index p = 0; p < 6; ++p) CHECK(one.to_group[static_cast<std::size_t>(p)] == p);

  const Transform t = build_transform(2, 2);
  // a_2 on covariate 1 sits at per-point position 4 and lands in slot 2 of alpha_1.
  CHECK(t.to_group[4] == 1);
  CHECK(t.to_group[0] == 0);
  CHECK(t.to_group[2] == 4);  // h b_1 on covariate 1 -> first slot of h beta_1

  const Transform big = build_transform(7, 3);
  const Vector v = Vector::LinSpaced(42, 0.0, 41.0);
  CHECK(big.to_point_order(big.to_group_order(v)) == v);
  std::vector<Index> seen(big.to_group);
  std::sort(seen.begin(), seen.end());
  for (Index i = 0; i < 42; ++i) CHECK(seen[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("gradient identity at the expansion point") {
  const Dataset data = oracle::random_dataset(FamilyKind::PoissonLog, 30, 3, 41);
  const double h = 0.45;
  const Kernel kern(h);
  const CoefficientField tilde = random_field(30, 3, h, 2);
  const auto s = build_surrogate(data, Family(FamilyKind::PoissonLog), kern, tilde);
  const Matrix grad = s.gradient(field_matrix(tilde));
  for (Index k = 0; k < 30; ++k) {
    const Vector ref = oracle::local_gradient(data, FamilyKind::PoissonLog, h, data.u()[k], field_matrix(tilde).row(k));
    CHECK((grad.row(k).transpose() - ref).norm() < 1e-8 * std::max(1.0, ref.norm()));
  }
  CHECK(s.eta.allFinite());
}

TEST_CASE("Gaussian surrogate reproduces local WLS") {
  const Dataset data = oracle::random_dataset(FamilyKind::GaussianIdentity, 25, 2, 43);
  const double h = 0.5;
  const Kernel kern(h);
  const auto s = build_surrogate(data, Family(FamilyKind::GaussianIdentity), kern, random_field(25, 2, h, 3));
  REQUIRE(s.jitter.isZero(0.0));
  const Matrix hd = s.dense_h();
  const Vector theta = (hd.transpose() * hd).ldlt().solve(hd.transpose() * s.eta_vector());
  const Matrix tm = s.to_matrix(theta);
  for (Index k = 0; k < 25; ++k) {
    const Vector wls = oracle::local_wls(data, h, data.u()[k]);
    CHECK((tm.row(k).transpose() - wls).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("surrogate differs from the quadratic expansion by a constant") {
  const Dataset data = oracle::random_dataset(FamilyKind::PoissonLog, 5, 2, 45);
  const double h = 1.2;
  const Kernel kern(h);
  const CoefficientField tilde = random_field(5, 2, h, 4);
  const auto s = build_surrogate(data, Family(FamilyKind::PoissonLog), kern, tilde);
  REQUIRE(s.jitter.isZero(0.0));
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> diffs;
  for (int t = 0; t < 20; ++t) {
    Matrix theta(5, 4);
    for (Index i = 0; i < theta.size(); ++i) theta.data()[i] = z(rng);
    const double surrogate = -s.loss(theta);
    const double expansion = oracle::quadratic_expansion(data, FamilyKind::PoissonLog, h, field_matrix(tilde), theta);
    diffs.push_back(surrogate - expansion);
  }
  for (double d : diffs) CHECK(std::abs(d - diffs[0]) <= 1e-7 * std::max(1.0, std::abs(diffs[0])));
}

TEST_CASE("factorization consistency and block structure") {
  const Dataset data = oracle::random_dataset(FamilyKind::BernoulliLogit, 12, 2, 47);
  const double h = 0.6;
  const Kernel kern(h);
  const CoefficientField tilde = random_field(12, 2, h, 5);
  const auto s = build_surrogate(data, Family(FamilyKind::BernoulliLogit), kern, tilde);
  for (Index k = 0; k < 12; ++k) {
    const Matrix& c = s.factor[static_cast<std::size_t>(k)];
    const Matrix neg = -oracle::local_hessian(data, FamilyKind::BernoulliLogit, h, data.u()[k], field_matrix(tilde).row(k));
    const Matrix target = neg + s.jitter[k] * Matrix::Identity(4, 4);
    CHECK((c.transpose() * c - target).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, neg.norm()));
    CHECK(c.isUpperTriangular(0.0));
  }
  const Matrix hd = s.dense_h();
  const Matrix gram = hd.transpose() * hd;
  for (Index g = 0; g < 4; ++g)
    for (Index l = 0; l < 4; ++l) {
      const Matrix block = gram.block(g * 12, l * 12, 12, 12);
      const Matrix off = block - Matrix(block.diagonal().asDiagonal());
      CHECK(off.cwiseAbs().maxCoeff() < 1e-12);
      if (g == l) CHECK((block.diagonal() - s.diagonal.col(g)).cwiseAbs().maxCoeff() < 1e-12);
    }
  // Implicit products agree with the dense matrix.
  Matrix theta = Matrix::Random(12, 4);
  CHECK((s.apply(theta) - hd * s.to_vector(theta)).cwiseAbs().maxCoeff() < 1e-12);
  const Vector dense_grad = hd.transpose() * (s.eta_vector() - hd * s.to_vector(theta));
  CHECK((s.to_vector(s.gradient(theta)) - dense_grad).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(std::abs(s.loss(theta) - 0.5 * (s.eta_vector() - hd * s.to_vector(theta)).squaredNorm()) < 1e-10);
}
