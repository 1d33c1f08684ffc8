#pragma once

// Group weights for the adaptive group LASSO and group SCAD penalties.

#include "gsvcm/core.hpp"

#include <limits>

namespace gsvcm {

// Weight value that forces its group to zero.
inline constexpr double kPinned = std::numeric_limits<double>::infinity();

inline bool is_pinned(double tau) noexcept { return tau == kPinned; }

struct GroupWeights {
  Vector tau1;  // alpha groups
  Vector tau2;  // h beta groups
  bool frozen = false;
};

// Root of the centred sum of squares, with no 1/n factor.
double deviation(const Eigen::Ref<const Vector>& values);

// lambda [1{z <= lambda} + (a0 lambda - z)_+ / ((a0 - 1) lambda) 1{z > lambda}]
double scad_derivative(double z, double lambda, double a0);

// Reference norms below this pin adaptive weights.
inline constexpr double kNormCutoff = 1e-12;

GroupWeights compute_weights(const PenaltySpec& spec, const Matrix& alpha_ref, double h);

}  // namespace gsvcm
