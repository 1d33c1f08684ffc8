#pragma once

// Blockwise minimisation of
//   O(theta) = 0.5 |eta - H theta|^2 + sum_j tau1_j |alpha_j| + tau2_j |h beta_j|
// over the quadratic surrogate, with the zero-group reactivation rule.

#include "gsvcm/penalties.hpp"
#include "gsvcm/preliminary.hpp"
#include "gsvcm/surrogate.hpp"

#include <optional>
#include <vector>

namespace gsvcm {

enum class BlockSolver {
  Majorize,  // one ridge step tau / |theta_g| per sweep, as printed
  Exact,     // the same ridge with |theta_g| solved to a fixed point inside the block
};

struct SelectorConfig {
  PenaltySpec penalty;
  double convergence_threshold = 1e-4;  // scaled by sqrt(n d)
  int max_outer_iters = 100;
  bool reactivation = true;
  // Multiply the h beta normal matrix by h as printed in the update formula.
  bool printed_h_variant = false;
  BlockSolver block_solver = BlockSolver::Exact;
  // After each sweep, try one majorised step on all active groups at once
  // (per-point solves) and keep it if the objective drops.
  bool joint_step = true;
  // Zero h beta_j wherever alpha_j ended at zero. Off leaves the raw minimiser.
  bool zero_stray_beta = true;
};

struct SelectorResult {
  CoefficientField field;
  std::vector<Index> active_alpha;
  std::vector<Index> active_beta;
  std::vector<double> objective_trace;
  double kkt_residual = 0.0;  // at the final iterate, before stray betas are zeroed
  int iters = 0;
  bool converged = false;
  GroupWeights weights;  // weights used in the final sweep
};

// H_g' (eta - H theta_{-g}) for group g (0-based over the 2d groups).
Vector partial_residual(const QuadraticSurrogate& s, const Matrix& theta, Index g);

struct KktOutcome {
  bool zero = true;
  Vector direction;  // partial residual when the group is active
};

KktOutcome kkt_check(const QuadraticSurrogate& s, const Matrix& theta, Index g, double tau);

// (H_g' H_g + (tau / current_norm) I)^{-1} H_g' (eta - H theta_{-g})
Vector block_update(const QuadraticSurrogate& s, const Matrix& theta, Index g, double tau, double current_norm);

// argmin_t 0.5 sum_k D_k t_k^2 - r't + tau |t| for ||r|| > tau: t_k = r_k / (D_k + tau / nu)
// with nu = |t| found by Newton iteration.
Vector exact_block_solve(const Vector& r, const Vector& diag, double tau);

// Same solve with ridge tau / delta, for a group currently at zero.
Vector reactivate(const QuadraticSurrogate& s, const Matrix& theta, Index g, double tau, double delta);

// Penalty with pinned weights contributing nothing on zero groups.
double penalty_value(const Matrix& theta, const GroupWeights& w);
double objective(const QuadraticSurrogate& s, const Matrix& theta, const GroupWeights& w);

// Max over active groups of |G_g - tau_g u_g / |u_g|| and over zero groups of
// (|G_g| - tau_g)_+, with G = H' (eta - H theta).
double kkt_residual(const QuadraticSurrogate& s, const Matrix& theta, const GroupWeights& w);

SelectorResult run_selection(const QuadraticSurrogate& s, const PreliminaryFit& pre, const SelectorConfig& config);

// Start from `init` (n x 2d). With `fixed` the weights are held at that value
// for every sweep; otherwise they follow the penalty's refresh schedule.
SelectorResult run_selection_from(const QuadraticSurrogate& s, const Matrix& init, const SelectorConfig& config,
                                  const std::optional<GroupWeights>& fixed = std::nullopt);

}  // namespace gsvcm
