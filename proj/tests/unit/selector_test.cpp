#include "gsvcm/selector.hpp"
#include "oracles.hpp"
#include "toy_problems.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace gsvcm;

using toy::manual_surrogate;
using toy::random_eta;
using toy::random_factors;
using toy::tau_vector;

namespace {

// Dense H_g' (eta - H theta_{-g})
Vector dense_partial(const QuadraticSurrogate& s, const Matrix& theta, Index g) {
  const Matrix hd = s.dense_h();
  Vector t = s.to_vector(theta);
  t.segment(g * s.n, s.n).setZero();
  return hd.middleCols(g * s.n, s.n).transpose() * (s.eta_vector() - hd * t);
}

GroupWeights weights(std::initializer_list<double> t1, std::initializer_list<double> t2) {
  GroupWeights w;
  w.tau1 = Eigen::Map<const Vector>(t1.begin(), static_cast<Index>(t1.size()));
  w.tau2 = Eigen::Map<const Vector>(t2.begin(), static_cast<Index>(t2.size()));
  w.frozen = true;
  return w;
}


}  // namespace

TEST_CASE("partial residual matches the dense construction") {
  const auto s = manual_surrogate(random_factors(6, 4, 1), random_eta(4, 6, 2), 0.4);
  const Matrix theta = Matrix::Random(6, 4);
  for (Index g = 0; g < 4; ++g)
    CHECK((partial_residual(s, theta, g) - dense_partial(s, theta, g)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("kkt_check") {
  auto factors = random_factors(3, 2, 3);
  Matrix eta = random_eta(2, 3, 4);
  const Matrix zero = Matrix::Zero(3, 2);
  {
    const auto s = manual_surrogate(factors, eta, 0.5);
    const auto out = kkt_check(s, zero, 1, 0.0);
    CHECK_FALSE(out.zero);
    CHECK((out.direction - dense_partial(s, zero, 1)).norm() < 1e-12);
    CHECK(kkt_check(s, zero, 0, kPinned).zero);
  }
  // scale eta so group 2's partial residual has norm 0.3
  const auto probe = manual_surrogate(factors, eta, 0.5);
  eta *= 0.3 / dense_partial(probe, zero, 1).norm();
  const auto s = manual_surrogate(factors, eta, 0.5);
  CHECK(std::abs(dense_partial(s, zero, 1).norm() - 0.3) < 1e-12);
  CHECK(kkt_check(s, zero, 1, 0.5).zero);
  CHECK_FALSE(kkt_check(s, zero, 1, 0.29).zero);
}

TEST_CASE("block_update") {
  const auto s = manual_surrogate(random_factors(5, 4, 5), random_eta(4, 5, 6), 0.3);
  const Matrix theta = Matrix::Random(5, 4);
  for (Index g = 0; g < 4; ++g) {
    const Vector r = dense_partial(s, theta, g);
    const Vector plain = r.cwiseQuotient(s.diagonal.col(g));
    CHECK((block_update(s, theta, g, 0.0, 1.0) - plain).cwiseAbs().maxCoeff() < 1e-12);
    const Vector ridge = r.cwiseQuotient((s.diagonal.col(g).array() + 0.7 / 2.0).matrix());
    CHECK((block_update(s, theta, g, 0.7, 2.0) - ridge).cwiseAbs().maxCoeff() < 1e-12);
  }

  std::vector<Matrix> identity(4, Matrix::Identity(2, 2));
  const auto o = manual_surrogate(identity, random_eta(2, 4, 7), 1.0);
  const Matrix t0 = Matrix::Random(4, 2);
  const Vector half = 0.5 * dense_partial(o, t0, 0);
  CHECK((block_update(o, t0, 0, 1.5, 1.5) - half).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("exact block solve satisfies its stationarity condition") {
  Vector r(4), diag(4);
  r << 1.0, -2.0, 0.5, 3.0;
  diag << 1.0, 2.0, 0.7, 1.3;
  const double tau = 1.2;
  const Vector t = exact_block_solve(r, diag, tau);
  const Vector stationarity = diag.cwiseProduct(t) - r + tau * t / t.norm();
  CHECK(stationarity.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("reactivate") {
  const auto s = manual_surrogate(random_factors(5, 4, 8), random_eta(4, 5, 9), 0.3);
  Matrix theta = Matrix::Random(5, 4);
  theta.col(2).setZero();
  const Vector r = dense_partial(s, theta, 2);
  const Vector plain = r.cwiseQuotient(s.diagonal.col(2));
  CHECK((reactivate(s, theta, 2, 0.5, 1e12) - plain).cwiseAbs().maxCoeff() < 1e-9);
  const double delta = theta.col(0).norm();
  const Vector hand = r.cwiseQuotient((s.diagonal.col(2).array() + 0.5 / delta).matrix());
  CHECK((reactivate(s, theta, 2, 0.5, delta) - hand).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("reactivation guard: groups satisfying KKT at zero stay zero") {
  const auto s = manual_surrogate(random_factors(5, 4, 10), random_eta(4, 5, 11), 0.3);
  const Matrix zero = Matrix::Zero(5, 4);
  Vector norms(4);
  for (Index g = 0; g < 4; ++g) norms[g] = dense_partial(s, zero, g).norm();
  SelectorConfig cfg;
  GroupWeights w = weights({norms[0] * 1.01, norms[1] * 0.5}, {norms[2] * 1.01, norms[3] * 0.5});
  const auto res = run_selection_from(s, zero, cfg, w);
  // every group starts above or below its threshold; zero ones must satisfy KKT at the end
  for (Index g = 0; g < 4; ++g) {
    const Matrix theta = [&] {
      Matrix t(5, 4);
      t << res.field.alpha, res.field.beta * s.h;
      return t;
    }();
    if (theta.col(g).isZero(0.0)) CHECK(dense_partial(s, theta, g).norm() <= tau_vector(w)[g] * (1 + 1e-9));
  }
}

TEST_CASE("three free groups: fixed point matches proximal gradient") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto s = manual_surrogate(random_factors(6, 4, 20 + seed), random_eta(4, 6, 30 + seed), 0.5);
    const GroupWeights w = weights({0.4, kPinned}, {0.8, 0.3});
    SelectorConfig cfg;
    cfg.convergence_threshold = 1e-9;
    cfg.max_outer_iters = 5000;
    cfg.zero_stray_beta = false;
    const auto res = run_selection_from(s, Matrix::Zero(6, 4), cfg, w);
    Matrix theta(6, 4);
    theta << res.field.alpha, res.field.beta * s.h;
    const Vector ref = oracle::prox_gradient(s.dense_h(), s.eta_vector(), tau_vector(w), 6);
    const double mine = oracle::group_objective(s.dense_h(), s.eta_vector(), s.to_vector(theta), tau_vector(w), 6);
    const double theirs = oracle::group_objective(s.dense_h(), s.eta_vector(), ref, tau_vector(w), 6);
    CHECK(res.converged);
    CHECK(std::abs(mine - theirs) < 1e-6);
    CHECK((s.to_vector(theta) - ref).cwiseAbs().maxCoeff() < 1e-4);
    CHECK(theta.col(1).isZero(0.0));
  }
}

TEST_CASE("no penalty reproduces local WLS on Gaussian data") {
  const Dataset data = oracle::random_dataset(FamilyKind::GaussianIdentity, 30, 2, 51);
  const double h = 0.5;
  const Kernel kern(h);
  CoefficientField start{Matrix::Zero(30, 2), Matrix::Zero(30, 2), h};
  const auto s = build_surrogate(data, Family(FamilyKind::GaussianIdentity), kern, start);
  SelectorConfig cfg;
  const auto res = run_selection_from(s, Matrix::Zero(30, 4), cfg, weights({0.0, 0.0}, {0.0, 0.0}));
  CHECK(res.converged);
  for (Index k = 0; k < 30; ++k) {
    const Vector wls = oracle::local_wls(data, h, data.u()[k]);
    CHECK(std::abs(res.field.alpha(k, 0) - wls[0]) < 1e-6);
    CHECK(std::abs(res.field.alpha(k, 1) - wls[1]) < 1e-6);
    CHECK(std::abs(res.field.beta(k, 0) * h - wls[2]) < 1e-6);
    CHECK(std::abs(res.field.beta(k, 1) * h - wls[3]) < 1e-6);
  }
}

TEST_CASE("all groups pinned gives the zero fit after one sweep") {
  const auto s = manual_surrogate(random_factors(5, 4, 60), random_eta(4, 5, 61), 0.3);
  SelectorConfig cfg;
  const auto res =
      run_selection_from(s, Matrix::Random(5, 4), cfg, weights({kPinned, kPinned}, {kPinned, kPinned}));
  CHECK(res.field.alpha.isZero(0.0));
  CHECK(res.field.beta.isZero(0.0));
  CHECK(res.objective_trace.size() == 1);
  CHECK(res.converged);
  CHECK(res.active_alpha.empty());
}

TEST_CASE("penalised runs certify KKT and store exact zeros") {
  const Dataset data = oracle::random_dataset(FamilyKind::PoissonLog, 60, 5, 71, 0.7);
  const double h = 0.4;
  const Kernel kern(h);
  const Family f(FamilyKind::PoissonLog);
  const auto pre = preliminary_fit(data, f, kern, 0.02, 0.02);
  const auto s = build_surrogate(data, f, kern, pre);
  const double eta_norm = s.eta.norm();
  int converged = 0;
  for (PenaltyKind kind : {PenaltyKind::GroupScad, PenaltyKind::AdaptiveGroupLasso}) {
    for (double lam : {0.01, 0.05, 0.2}) {
      SelectorConfig cfg;
      cfg.penalty = kind == PenaltyKind::GroupScad ? PenaltySpec::group_scad(lam, lam)
                                                   : PenaltySpec::adaptive_group_lasso(lam, lam);
      const auto res = run_selection(s, pre, cfg);
      if (!res.converged) continue;
      ++converged;
      CHECK(res.kkt_residual <= 1e-3 * (1.0 + eta_norm));
      for (Index j = 0; j < 5; ++j) {
        const bool a_active = std::find(res.active_alpha.begin(), res.active_alpha.end(), j) != res.active_alpha.end();
        const bool b_active = std::find(res.active_beta.begin(), res.active_beta.end(), j) != res.active_beta.end();
        CHECK(a_active == !res.field.alpha.col(j).isZero(0.0));
        CHECK(b_active == !res.field.beta.col(j).isZero(0.0));
        if (!a_active) CHECK_FALSE(b_active);
      }
      for (std::size_t i = 1; i < res.objective_trace.size() && res.weights.frozen; ++i)
        CHECK(res.objective_trace[i] <= res.objective_trace[i - 1] + 1e-9 * std::abs(res.objective_trace[i - 1]));
    }
  }
  CHECK(converged >= 4);
}
