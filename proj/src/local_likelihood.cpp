#include "gsvcm/local_likelihood.hpp"

#include <cmath>

namespace gsvcm {

LocalDesign LocalDesign::at(const Dataset& data, const Kernel& kernel, double center) {
  LocalDesign design;
  design.center = center;
  design.h = kernel.bandwidth();
  design.n = data.n();
  const Vector& u = data.u();
  std::vector<double> w, t;
  for (Index i = 0; i < data.n(); ++i) {
    const double wi = kernel.weight(u[i] - center);
    if (wi > 0.0) {
      design.rows.push_back(i);
      w.push_back(wi);
      t.push_back((u[i] - center) / design.h);
    }
  }
  const Index m = design.size();
  const Index d = data.d();
  design.weights = Eigen::Map<const Vector>(w.data(), m);
  design.offsets = Eigen::Map<const Vector>(t.data(), m);
  design.z.resize(m, 2 * d);
  for (Index r = 0; r < m; ++r) {
    const auto xi = data.x().row(design.rows[r]);
    design.z.row(r).head(d) = xi;
    design.z.row(r).tail(d) = design.offsets[r] * xi;
  }
  return design;
}

Vector LocalDesign::full_weights() const {
  Vector w = Vector::Zero(n);
  for (Index r = 0; r < size(); ++r) w[rows[r]] = weights[r];
  return w;
}

namespace {

void check_coefficients(const LocalDesign& design, const Vector& v) {
  if (v.size() != design.params()) fail(ErrorKind::InvalidArgument, "local coefficient vector has wrong length");
  if (!v.allFinite()) fail(ErrorKind::InvalidArgument, "local coefficients must be finite");
}

}  // namespace

double local_loglik(const Dataset& data, const Family& family, const LocalDesign& design, const Vector& v) {
  check_coefficients(design, v);
  const Vector s = design.z * v;
  double total = 0.0;
  for (Index r = 0; r < design.size(); ++r)
    total += family.loglik_at(s[r], data.y()[design.rows[r]]) * design.weights[r];
  return total / static_cast<double>(design.n);
}

Vector local_score(const Dataset& data, const Family& family, const LocalDesign& design, const Vector& v) {
  check_coefficients(design, v);
  const Vector s = design.z * v;
  Vector wq(design.size());
  for (Index r = 0; r < design.size(); ++r) {
    double q1, q2;
    family.derivatives(s[r], data.y()[design.rows[r]], q1, q2);
    wq[r] = q1 * design.weights[r];
  }
  return design.z.transpose() * wq / static_cast<double>(design.n);
}

Matrix local_hessian(const Dataset& data, const Family& family, const LocalDesign& design, const Vector& v) {
  return -local_expand(data, family, design, v).neg_hessian;
}

LocalExpansion local_expand(const Dataset& data, const Family& family, const LocalDesign& design,
                            const Vector& v) {
  check_coefficients(design, v);
  const Index m = design.size();
  const Index p = design.params();
  const double inv_n = 1.0 / static_cast<double>(design.n);
  const Vector s = design.z * v;
  Vector w1(m), w2(m);
  LocalExpansion out;
  for (Index r = 0; r < m; ++r) {
    const double y = data.y()[design.rows[r]];
    double q1, q2;
    family.derivatives(s[r], y, q1, q2);
    out.loglik += family.loglik_at(s[r], y) * design.weights[r];
    w1[r] = q1 * design.weights[r];
    w2[r] = std::sqrt(-q2 * design.weights[r]);
  }
  out.loglik *= inv_n;
  out.score = design.z.transpose() * w1 * inv_n;
  const Matrix zw = w2.asDiagonal() * design.z;
  out.neg_hessian = Matrix::Zero(p, p);
  out.neg_hessian.selfadjointView<Eigen::Lower>().rankUpdate(zw.transpose(), inv_n);
  out.neg_hessian.triangularView<Eigen::StrictlyUpper>() = out.neg_hessian.transpose();
  return out;
}

Vector pack_local(const Vector& a, const Vector& b, double h) {
  if (a.size() != b.size()) fail(ErrorKind::InvalidArgument, "a and b must have equal length");
  Vector v(2 * a.size());
  v << a, h * b;
  return v;
}

double local_loglik(const Dataset& data, const Family& family, const Kernel& kernel, Index k,
                    const Vector& a, const Vector& b) {
  const auto design = LocalDesign::at_point(data, kernel, k);
  return local_loglik(data, family, design, pack_local(a, b, kernel.bandwidth()));
}

Vector local_score(const Dataset& data, const Family& family, const Kernel& kernel, Index k,
                   const Vector& a, const Vector& b) {
  const auto design = LocalDesign::at_point(data, kernel, k);
  return local_score(data, family, design, pack_local(a, b, kernel.bandwidth()));
}

Matrix local_hessian(const Dataset& data, const Family& family, const Kernel& kernel, Index k,
                     const Vector& a, const Vector& b) {
  const auto design = LocalDesign::at_point(data, kernel, k);
  return local_hessian(data, family, design, pack_local(a, b, kernel.bandwidth()));
}

}  // namespace gsvcm
