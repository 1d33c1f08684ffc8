#pragma once

// Reference computations for the tests. Nothing here calls into the library's
// numerical code: densities, kernels and solvers are written out directly.

#include "gsvcm/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

namespace oracle {

using gsvcm::FamilyKind;
using gsvcm::Index;
using gsvcm::Matrix;
using gsvcm::Vector;

inline double epanechnikov(double t, double h) {
  const double r = t / h;
  return std::abs(r) < 1.0 ? 0.75 * (1.0 - r * r) / h : 0.0;
}

// log density at linear predictor s (canonical link)
inline double log_density(FamilyKind f, double s, double y) {
  switch (f) {
    case FamilyKind::GaussianIdentity: return -0.5 * (y - s) * (y - s) - 0.5 * std::log(2.0 * M_PI);
    case FamilyKind::PoissonLog: return y * s - std::exp(s) - std::lgamma(y + 1.0);
    case FamilyKind::BernoulliLogit: return y * s - std::log1p(std::exp(s));
  }
  return 0.0;
}

inline double mean_of(FamilyKind f, double s) {
  switch (f) {
    case FamilyKind::GaussianIdentity: return s;
    case FamilyKind::PoissonLog: return std::exp(s);
    case FamilyKind::BernoulliLogit: return 1.0 / (1.0 + std::exp(-s));
  }
  return s;
}

// z_i = (x_i, (u_i - c)/h x_i)
inline Vector local_row(const gsvcm::Dataset& data, Index i, double center, double h) {
  const Index d = data.d();
  Vector z(2 * d);
  z.head(d) = data.x().row(i).transpose();
  z.tail(d) = (data.u()[i] - center) / h * data.x().row(i).transpose();
  return z;
}

// (1/n) sum_i K_h(U_i - c) l(z_i'v, y_i), summed over every row
inline double local_loglik(const gsvcm::Dataset& data, FamilyKind f, double h, double center, const Vector& v) {
  double total = 0.0;
  for (Index i = 0; i < data.n(); ++i) {
    const double w = epanechnikov(data.u()[i] - center, h);
    if (w == 0.0) continue;
    total += w * log_density(f, local_row(data, i, center, h).dot(v), data.y()[i]);
  }
  return total / static_cast<double>(data.n());
}

inline Vector local_gradient(const gsvcm::Dataset& data, FamilyKind f, double h, double center, const Vector& v) {
  Vector g = Vector::Zero(v.size());
  for (Index i = 0; i < data.n(); ++i) {
    const double w = epanechnikov(data.u()[i] - center, h);
    if (w == 0.0) continue;
    const Vector z = local_row(data, i, center, h);
    g += w * (data.y()[i] - mean_of(f, z.dot(v))) * z;
  }
  return g / static_cast<double>(data.n());
}

inline Vector fd_gradient(const std::function<double(const Vector&)>& fn, const Vector& x, double step = 1e-6) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector a = x, b = x;
    a[i] += step;
    b[i] -= step;
    g[i] = (fn(a) - fn(b)) / (2.0 * step);
  }
  return g;
}

inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& fn, const Vector& x, double step = 1e-6) {
  const Index m = fn(x).size();
  Matrix j(m, x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector a = x, b = x;
    a[i] += step;
    b[i] -= step;
    j.col(i) = (fn(a) - fn(b)) / (2.0 * step);
  }
  return j;
}

// Closed-form local weighted least squares at `center`: v = (a, h b).
inline Vector local_wls(const gsvcm::Dataset& data, double h, double center) {
  const Index p = 2 * data.d();
  Matrix a = Matrix::Zero(p, p);
  Vector b = Vector::Zero(p);
  for (Index i = 0; i < data.n(); ++i) {
    const double w = epanechnikov(data.u()[i] - center, h);
    if (w == 0.0) continue;
    const Vector z = local_row(data, i, center, h);
    a += w * z * z.transpose();
    b += w * data.y()[i] * z;
  }
  return a.fullPivLu().solve(b);
}

inline double two_pass_deviation(const Vector& v) {
  double mean = 0.0;
  for (Index i = 0; i < v.size(); ++i) mean += v[i];
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (Index i = 0; i < v.size(); ++i) ss += (v[i] - mean) * (v[i] - mean);
  return std::sqrt(ss);
}

inline double gic_value(double minus2ll, double n, double d, double h, double k1, double k2) {
  const double c = 1.028571;
  return minus2ll + 2.0 * std::log(std::log(n)) * std::log(c * d / h) * (k1 + c * k2 / h);
}

inline Matrix local_hessian(const gsvcm::Dataset& data, FamilyKind f, double h, double center, const Vector& v) {
  Matrix m = Matrix::Zero(v.size(), v.size());
  for (Index i = 0; i < data.n(); ++i) {
    const double w = epanechnikov(data.u()[i] - center, h);
    if (w == 0.0) continue;
    const Vector z = local_row(data, i, center, h);
    const double mu = mean_of(f, z.dot(v));
    const double var = f == FamilyKind::GaussianIdentity ? 1.0 : f == FamilyKind::PoissonLog ? mu : mu * (1.0 - mu);
    m -= w * var * z * z.transpose();
  }
  return m / static_cast<double>(data.n());
}

// Second-order expansion of sum_k L_k around v~_k, evaluated at v_k = row k of
// theta (n x 2d).
inline double quadratic_expansion(const gsvcm::Dataset& data, FamilyKind f, double h, const Matrix& tilde,
                                  const Matrix& theta) {
  double total = 0.0;
  for (Index k = 0; k < data.n(); ++k) {
    const double c = data.u()[k];
    const Vector vt = tilde.row(k).transpose();
    const Vector dv = theta.row(k).transpose() - vt;
    const Vector g = local_gradient(data, f, h, c, vt);
    const Matrix hess = local_hessian(data, f, h, c, vt);
    total += local_loglik(data, f, h, c, vt) + g.dot(dv) + 0.5 * dv.dot(hess * dv);
  }
  return total;
}

// 0.5 |eta - H t|^2 + sum_g tau_g |t_g|, groups of size n in order.
inline double group_objective(const Matrix& hmat, const Vector& eta, const Vector& t, const Vector& tau, Index n) {
  double pen = 0.0;
  for (Index g = 0; g < tau.size(); ++g) {
    const double norm = t.segment(g * n, n).norm();
    if (norm == 0.0) continue;
    if (std::isinf(tau[g])) return std::numeric_limits<double>::infinity();
    pen += tau[g] * norm;
  }
  return 0.5 * (eta - hmat * t).squaredNorm() + pen;
}

// Accelerated proximal gradient with restart. Infinite tau keeps a group at zero.
inline Vector prox_gradient(const Matrix& hmat, const Vector& eta, const Vector& tau, Index n, int iters = 200000,
                            double tol = 1e-15) {
  const Matrix gram = hmat.transpose() * hmat;
  const Vector hte = hmat.transpose() * eta;
  const double lip = Eigen::SelfAdjointEigenSolver<Matrix>(gram).eigenvalues().maxCoeff();
  const double step = 1.0 / lip;
  auto prox = [&](Vector x) {
    for (Index g = 0; g < tau.size(); ++g) {
      auto seg = x.segment(g * n, n);
      if (std::isinf(tau[g])) {
        seg.setZero();
        continue;
      }
      const double norm = seg.norm();
      const double shrink = norm > step * tau[g] ? 1.0 - step * tau[g] / norm : 0.0;
      seg *= shrink;
    }
    return x;
  };
  Vector x = Vector::Zero(hmat.cols());
  Vector y = x;
  double t = 1.0;
  double prev = group_objective(hmat, eta, x, tau, n);
  for (int it = 0; it < iters; ++it) {
    const Vector next = prox(y - step * (gram * y - hte));
    const double value = group_objective(hmat, eta, next, tau, n);
    if (value > prev) {
      // restart momentum
      y = x;
      t = 1.0;
      continue;
    }
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / tn) * (next - x);
    const double moved = (next - x).norm();
    x = next;
    t = tn;
    if (prev - value < tol * (1.0 + std::abs(value)) && moved < 1e-12) break;
    prev = value;
  }
  return x;
}

// max L(v) - l1 |a|_1 - l2 |hb|_1 by projected gradient on v = p - q, p, q >= 0.
inline Vector projected_gradient_l1(const gsvcm::Dataset& data, FamilyKind f, double h, double center, double l1,
                                    double l2, int iters = 400000) {
  const Index d = data.d();
  Vector lam(2 * d);
  lam.head(d).setConstant(l1);
  lam.tail(d).setConstant(l2);
  auto value = [&](const Vector& p, const Vector& q) {
    return -local_loglik(data, f, h, center, p - q) + lam.dot(p + q);
  };
  Vector p = Vector::Zero(2 * d), q = Vector::Zero(2 * d);
  double step = 1.0;
  double current = value(p, q);
  for (int it = 0; it < iters; ++it) {
    const Vector g = local_gradient(data, f, h, center, p - q);
    const Vector gp = -g + lam, gq = g + lam;
    Vector np, nq;
    double next;
    for (;;) {
      np = (p - step * gp).cwiseMax(0.0);
      nq = (q - step * gq).cwiseMax(0.0);
      next = value(np, nq);
      const double decrease = gp.dot(p - np) + gq.dot(q - nq);
      const double dist = (p - np).squaredNorm() + (q - nq).squaredNorm();
      if (next <= current - decrease + dist / (2.0 * step) || step < 1e-14) break;
      step *= 0.5;
    }
    const double moved = (np - p).norm() + (nq - q).norm();
    p = np;
    q = nq;
    const double prev = current;
    current = next;
    step *= 1.5;
    if (moved < 1e-13 && prev - current < 1e-16) break;
  }
  return p - q;
}

// Random datasets for the tests.
inline gsvcm::Dataset random_dataset(FamilyKind f, Index n, Index d, std::uint64_t seed, double scale = 0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> norm(0.0, 1.0);
  Vector u(n), y(n);
  Matrix x(n, d);
  for (Index i = 0; i < n; ++i) {
    u[i] = unif(rng);
    for (Index j = 0; j < d; ++j) x(i, j) = j == 0 ? 1.0 : norm(rng);
    double s = 0.0;
    for (Index j = 0; j < d; ++j) s += scale * std::sin(2.0 * (j + 1) * u[i]) * x(i, j);
    switch (f) {
      case FamilyKind::GaussianIdentity: y[i] = s + 0.3 * norm(rng); break;
      case FamilyKind::PoissonLog: y[i] = std::poisson_distribution<int>(std::exp(s))(rng); break;
      case FamilyKind::BernoulliLogit: y[i] = unif(rng) < 1.0 / (1.0 + std::exp(-s)) ? 1.0 : 0.0; break;
    }
  }
  return gsvcm::Dataset(u, x, y);
}

}  // namespace oracle
