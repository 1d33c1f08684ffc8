#pragma once

// Small synthetic surrogates built directly from per-point factors.

#include "gsvcm/selector.hpp"
#include "gsvcm/surrogate.hpp"

#include <random>
#include <vector>

namespace toy {

using gsvcm::GroupWeights;
using gsvcm::Index;
using gsvcm::Matrix;
using gsvcm::QuadraticSurrogate;
using gsvcm::Vector;

// Surrogate with expansion point 0 built straight from per-point factors.
inline QuadraticSurrogate manual_surrogate(const std::vector<Matrix>& factors, const Matrix& eta, double h) {
  QuadraticSurrogate s;
  s.n = static_cast<Index>(factors.size());
  s.d = eta.rows() / 2;
  s.h = h;
  s.factor = factors;
  s.eta = eta;
  s.expansion = Matrix::Zero(s.n, 2 * s.d);
  s.score.resize(2 * s.d, s.n);
  s.diagonal.resize(s.n, 2 * s.d);
  s.jitter = Vector::Zero(s.n);
  for (Index k = 0; k < s.n; ++k) {
    const Matrix& c = factors[static_cast<std::size_t>(k)];
    s.curvature.push_back(c.transpose() * c);
    s.score.col(k) = c.transpose() * eta.col(k);
    s.diagonal.row(k) = s.curvature.back().diagonal().transpose();
  }
  s.transform = gsvcm::build_transform(s.n, s.d);
  s.offset = 0.5 * eta.squaredNorm();
  return s;
}

inline std::vector<Matrix> random_factors(Index n, Index p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  std::vector<Matrix> out;
  for (Index k = 0; k < n; ++k) {
    Matrix c = Matrix::Zero(p, p);
    for (Index r = 0; r < p; ++r) {
      c(r, r) = 1.0 + std::abs(unif(rng));
      for (Index col = r + 1; col < p; ++col) c(r, col) = unif(rng);
    }
    out.push_back(c);
  }
  return out;
}

inline Matrix random_eta(Index p, Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Matrix e(p, n);
  for (Index i = 0; i < e.size(); ++i) e.data()[i] = z(rng);
  return e;
}

inline Vector tau_vector(const GroupWeights& w) {
  Vector t(w.tau1.size() + w.tau2.size());
  t << w.tau1, w.tau2;
  return t;
}

}  // namespace toy
