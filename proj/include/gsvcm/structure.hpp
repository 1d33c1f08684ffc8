#pragma once

// Final model: per-covariate verdicts, constant estimates and prediction.

#include "gsvcm/core.hpp"
#include "gsvcm/selector.hpp"

#include <string>
#include <vector>

namespace gsvcm {

enum class VerdictKind { Zero, Constant, Varying };

std::string_view verdict_name(VerdictKind kind) noexcept;

struct Verdict {
  VerdictKind kind = VerdictKind::Zero;
  double value = 0.0;  // Constant only
  Vector alpha;        // values at the knots, zero unless Varying
  Vector beta;         // derivative estimates at the knots, zero unless Varying
};

struct StructureReport {
  FamilyKind family = FamilyKind::GaussianIdentity;
  double bandwidth = 0.0;
  PenaltySpec penalty;
  Vector knots;                    // U_k in sample order
  std::vector<Verdict> verdicts;
  Index k1 = 0;
  Index k2 = 0;

  Index d() const noexcept { return static_cast<Index>(verdicts.size()); }
  // a_j at knot k.
  double coefficient_at_knot(Index j, Index k) const;
  // a_j(u) by linear interpolation between bracketing knots.
  double coefficient(Index j, double u) const;
  Vector coefficients(double u) const;
};

double estimate_constant(const Eigen::Ref<const Vector>& alpha_col);

StructureReport classify(const SelectorResult& result, const Vector& knots, const Family& family,
                         const PenaltySpec& penalty);

// g^{-1}(sum_j a_j(u) x_j); u outside the knot range is an out-of-domain error.
double predict(const StructureReport& report, const Family& family, double u, const Vector& x);

// Fitted mean at training point k using knot values directly.
double fitted_mean(const StructureReport& report, const Family& family, Index k, const Vector& x);

// Pairs of identical covariate columns reported Varying with different curves.
std::vector<std::string> collinearity_warnings(const Dataset& data, const StructureReport& report);

}  // namespace gsvcm
