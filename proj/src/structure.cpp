#include "gsvcm/structure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gsvcm {

std::string_view verdict_name(VerdictKind kind) noexcept {
  switch (kind) {
    case VerdictKind::Zero: return "zero";
    case VerdictKind::Constant: return "constant";
    case VerdictKind::Varying: return "varying";
  }
  return "zero";
}

double estimate_constant(const Eigen::Ref<const Vector>& alpha_col) {
  if (alpha_col.size() == 0) fail(ErrorKind::InvalidArgument, "constant estimate of an empty column");
  return alpha_col.mean();
}

StructureReport classify(const SelectorResult& result, const Vector& knots, const Family& family,
                         const PenaltySpec& penalty) {
  const Index n = result.field.n();
  const Index d = result.field.d();
  if (knots.size() != n) fail(ErrorKind::InvalidArgument, "knots do not match the fitted field");
  StructureReport report;
  report.family = family.kind();
  report.bandwidth = result.field.h;
  report.penalty = penalty;
  report.knots = knots;
  report.verdicts.resize(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) {
    Verdict& v = report.verdicts[static_cast<std::size_t>(j)];
    v.alpha = Vector::Zero(n);
    v.beta = Vector::Zero(n);
    if (result.field.alpha.col(j).isZero(0.0)) {
      v.kind = VerdictKind::Zero;
    } else if (result.field.beta.col(j).isZero(0.0)) {
      v.kind = VerdictKind::Constant;
      v.value = estimate_constant(result.field.alpha.col(j));
      ++report.k1;
    } else {
      v.kind = VerdictKind::Varying;
      v.alpha = result.field.alpha.col(j);
      v.beta = result.field.beta.col(j);
      ++report.k2;
    }
  }
  return report;
}

double StructureReport::coefficient_at_knot(Index j, Index k) const {
  const Verdict& v = verdicts.at(static_cast<std::size_t>(j));
  switch (v.kind) {
    case VerdictKind::Zero: return 0.0;
    case VerdictKind::Constant: return v.value;
    case VerdictKind::Varying: return v.alpha[k];
  }
  return 0.0;
}

namespace {

// Knot order by U, with the first sample index kept for repeated U values.
std::vector<Index> knot_order(const Vector& knots) {
  std::vector<Index> order(static_cast<std::size_t>(knots.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return knots[a] < knots[b]; });
  return order;
}

struct Bracket {
  Index lo = 0;
  Index hi = 0;
  double t = 0.0;
};

Bracket bracket(const Vector& knots, double u) {
  const auto order = knot_order(knots);
  const double first = knots[order.front()];
  const double last = knots[order.back()];
  if (!std::isfinite(u) || u < first || u > last)
    fail(ErrorKind::OutOfDomain, "index value " + std::to_string(u) + " lies outside the fitted range [" +
                                     std::to_string(first) + ", " + std::to_string(last) + "]");
  auto it = std::lower_bound(order.begin(), order.end(), u, [&](Index k, double value) { return knots[k] < value; });
  Bracket b;
  if (knots[*it] == u) {
    b.lo = b.hi = *it;
    return b;
  }
  b.hi = *it;
  b.lo = *(it - 1);
  b.t = (u - knots[b.lo]) / (knots[b.hi] - knots[b.lo]);
  return b;
}

double interpolate(const StructureReport& r, Index j, const Bracket& b) {
  const double lo = r.coefficient_at_knot(j, b.lo);
  if (b.lo == b.hi) return lo;
  return lo + b.t * (r.coefficient_at_knot(j, b.hi) - lo);
}

}  // namespace

double StructureReport::coefficient(Index j, double u) const { return interpolate(*this, j, bracket(knots, u)); }

Vector StructureReport::coefficients(double u) const {
  const Bracket b = bracket(knots, u);
  Vector a(d());
  for (Index j = 0; j < d(); ++j) a[j] = interpolate(*this, j, b);
  return a;
}

double predict(const StructureReport& report, const Family& family, double u, const Vector& x) {
  if (x.size() != report.d()) fail(ErrorKind::InvalidArgument, "covariate vector has wrong length");
  return family.inverse_link(report.coefficients(u).dot(x));
}

double fitted_mean(const StructureReport& report, const Family& family, Index k, const Vector& x) {
  double s = 0.0;
  for (Index j = 0; j < report.d(); ++j) s += report.coefficient_at_knot(j, k) * x[j];
  return family.inverse_link(s);
}

std::vector<std::string> collinearity_warnings(const Dataset& data, const StructureReport& report) {
  std::vector<std::string> out;
  for (Index a = 0; a < report.d(); ++a) {
    if (report.verdicts[static_cast<std::size_t>(a)].kind != VerdictKind::Varying) continue;
    for (Index b = a + 1; b < report.d(); ++b) {
      if (report.verdicts[static_cast<std::size_t>(b)].kind != VerdictKind::Varying) continue;
      if (data.x().col(a) != data.x().col(b)) continue;
      const Vector& ca = report.verdicts[static_cast<std::size_t>(a)].alpha;
      const Vector& cb = report.verdicts[static_cast<std::size_t>(b)].alpha;
      if ((ca - cb).cwiseAbs().maxCoeff() > 1e-8)
        out.push_back("covariates x" + std::to_string(a + 1) + " and x" + std::to_string(b + 1) +
                      " are identical but were given different curves");
    }
  }
  return out;
}

}  // namespace gsvcm
