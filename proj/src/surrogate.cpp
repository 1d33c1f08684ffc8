#include "gsvcm/surrogate.hpp"

#include "gsvcm/local_likelihood.hpp"
#include "gsvcm/parallel.hpp"

#include <array>
#include <cmath>

namespace gsvcm {

Transform build_transform(Index n, Index d) {
  if (n < 1 || d < 1) fail(ErrorKind::InvalidArgument, "transform needs n, d >= 1");
  Transform t;
  t.n = n;
  t.d = d;
  t.to_group.resize(static_cast<std::size_t>(2 * n * d));
  for (Index k = 0; k < n; ++k)
    for (Index c = 0; c < 2 * d; ++c) t.to_group[static_cast<std::size_t>(k * 2 * d + c)] = c * n + k;
  return t;
}

Vector Transform::to_group_order(const Vector& per_point) const {
  Vector out(per_point.size());
  for (std::size_t p = 0; p < to_group.size(); ++p) out[to_group[p]] = per_point[static_cast<Index>(p)];
  return out;
}

Vector Transform::to_point_order(const Vector& grouped) const {
  Vector out(grouped.size());
  for (std::size_t p = 0; p < to_group.size(); ++p) out[static_cast<Index>(p)] = grouped[to_group[p]];
  return out;
}

namespace {

constexpr std::array<double, 5> kJitterLadder{0.0, 1e-10, 1e-8, 1e-6, 1e-4};

struct PointFactor {
  Matrix factor;
  Matrix curvature;
  double jitter = 0.0;
};

PointFactor factor_point(Matrix neg_hessian, Index k) {
  const double mean_diag = neg_hessian.diagonal().mean();
  if (!(mean_diag > 0.0) || !std::isfinite(mean_diag))
    fail(ErrorKind::Numeric, "degenerate local Hessian at fitting point " + std::to_string(k + 1));
  for (double rung : kJitterLadder) {
    Matrix m = neg_hessian;
    const double jitter = rung * mean_diag;
    m.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) continue;
    const Vector pivots = llt.matrixLLT().diagonal();
    const double min_pivot = pivots.minCoeff();
    if (!(min_pivot * min_pivot >= 1e-12 * mean_diag)) continue;
    PointFactor out;
    out.factor = llt.matrixU();
    out.curvature = std::move(m);
    out.jitter = jitter;
    return out;
  }
  fail(ErrorKind::Numeric,
       "local Hessian at fitting point " + std::to_string(k + 1) + " is not positive definite after jitter 1e-4");
}

}  // namespace

QuadraticSurrogate build_surrogate(const Dataset& data, const Family& family, const Kernel& kernel,
                                   const PreliminaryFit& pre, unsigned threads) {
  return build_surrogate(data, family, kernel, pre.field, threads);
}

QuadraticSurrogate build_surrogate(const Dataset& data, const Family& family, const Kernel& kernel,
                                   const CoefficientField& expansion, unsigned threads) {
  const Index n = data.n();
  const Index d = data.d();
  const Index p = 2 * d;
  const double h = kernel.bandwidth();
  if (expansion.n() != n || expansion.d() != d)
    fail(ErrorKind::InvalidArgument, "expansion field does not match the dataset");

  QuadraticSurrogate s;
  s.n = n;
  s.d = d;
  s.h = h;
  s.factor.resize(static_cast<std::size_t>(n));
  s.curvature.resize(static_cast<std::size_t>(n));
  s.score.resize(p, n);
  s.eta.resize(p, n);
  s.expansion.resize(n, p);
  s.diagonal.resize(n, p);
  s.jitter.resize(n);
  s.expansion.leftCols(d) = expansion.alpha;
  s.expansion.rightCols(d) = h * expansion.beta;
  s.transform = build_transform(n, d);

  Vector offsets(n);
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t idx) {
    const Index k = static_cast<Index>(idx);
    const auto design = LocalDesign::at_point(data, kernel, k);
    const Vector v = s.expansion.row(k).transpose();
    LocalExpansion e = local_expand(data, family, design, v);
    PointFactor pf = factor_point(std::move(e.neg_hessian), k);
    // eta_k = C_k v_k + C_k^{-T} L'_k
    const Vector whitened = pf.factor.transpose().triangularView<Eigen::Lower>().solve(e.score);
    s.eta.col(k) = pf.factor.triangularView<Eigen::Upper>() * v + whitened;
    if (!s.eta.col(k).allFinite())
      fail(ErrorKind::Numeric, "non-finite pseudo-response at fitting point " + std::to_string(k + 1));
    offsets[k] = 0.5 * whitened.squaredNorm();
    s.score.col(k) = e.score;
    s.diagonal.row(k) = pf.curvature.diagonal().transpose();
    s.jitter[k] = pf.jitter;
    s.factor[idx] = std::move(pf.factor);
    s.curvature[idx] = std::move(pf.curvature);
  });
  s.offset = offsets.sum();
  return s;
}

double QuadraticSurrogate::loss(const Matrix& theta) const {
  // 0.5 |eta - H theta|^2 = offset + sum_k [0.5 e' M e - L'_k' e], e = v_k - v~_k
  double total = offset;
  for (Index k = 0; k < n; ++k) {
    const Vector e = (theta.row(k) - expansion.row(k)).transpose();
    total += 0.5 * e.dot(curvature[static_cast<std::size_t>(k)] * e) - score.col(k).dot(e);
  }
  return total;
}

Matrix QuadraticSurrogate::gradient(const Matrix& theta) const {
  Matrix g(2 * d, n);
  for (Index k = 0; k < n; ++k) {
    const Vector e = (theta.row(k) - expansion.row(k)).transpose();
    g.col(k) = score.col(k) - curvature[static_cast<std::size_t>(k)] * e;
  }
  return g.transpose();
}

Vector QuadraticSurrogate::apply(const Matrix& theta) const {
  const Index p = 2 * d;
  Vector out(n * p);
  for (Index k = 0; k < n; ++k)
    out.segment(k * p, p) = factor[static_cast<std::size_t>(k)].triangularView<Eigen::Upper>() *
                            theta.row(k).transpose();
  return out;
}

Vector QuadraticSurrogate::eta_vector() const {
  return Eigen::Map<const Vector>(eta.data(), eta.size());
}

Matrix QuadraticSurrogate::dense_h() const {
  const Index p = 2 * d;
  Matrix hm = Matrix::Zero(n * p, n * p);
  for (Index k = 0; k < n; ++k) {
    const Matrix& c = factor[static_cast<std::size_t>(k)];
    for (Index r = 0; r < p; ++r)
      for (Index col = 0; col < p; ++col) hm(k * p + r, transform.to_group[static_cast<std::size_t>(k * p + col)]) = c(r, col);
  }
  return hm;
}

Matrix QuadraticSurrogate::to_matrix(const Vector& theta) const {
  if (theta.size() != 2 * n * d) fail(ErrorKind::InvalidArgument, "theta has wrong length");
  return Eigen::Map<const Matrix>(theta.data(), n, 2 * d);
}

Vector QuadraticSurrogate::to_vector(const Matrix& theta) const {
  return Eigen::Map<const Vector>(theta.data(), theta.size());
}

}  // namespace gsvcm
