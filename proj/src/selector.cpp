#include "gsvcm/selector.hpp"

#include <cmath>
#include <limits>

namespace gsvcm {

namespace {

double group_diag(const QuadraticSurrogate& s, Index k, Index g, bool printed_h) {
  const double dk = s.diagonal(k, g);
  return (printed_h && g >= s.d) ? s.h * dk : dk;
}

double weight_of(const GroupWeights& w, Index g, Index d) { return g < d ? w.tau1[g] : w.tau2[g - d]; }

// Gradient H' (eta - H theta) in point layout: column k = L'_k - M_k (v_k - v~_k).
Matrix point_gradient(const QuadraticSurrogate& s, const Matrix& theta) {
  Matrix g(2 * s.d, s.n);
  for (Index k = 0; k < s.n; ++k) {
    const Vector e = (theta.row(k) - s.expansion.row(k)).transpose();
    g.col(k) = s.score.col(k) - s.curvature[static_cast<std::size_t>(k)] * e;
  }
  return g;
}

// 0.5 |eta - H theta|^2 from the maintained gradient:
// offset - 0.5 sum_k (v_k - v~_k)' (L'_k + G_k).
double loss_from_gradient(const QuadraticSurrogate& s, const Matrix& theta, const Matrix& grad) {
  double total = 0.0;
  for (Index k = 0; k < s.n; ++k)
    total += (theta.row(k) - s.expansion.row(k)).dot((s.score.col(k) + grad.col(k)).transpose());
  return s.offset - 0.5 * total;
}

void check_group(const QuadraticSurrogate& s, const Matrix& theta, Index g) {
  if (theta.rows() != s.n || theta.cols() != 2 * s.d)
    fail(ErrorKind::InvalidArgument, "theta does not match the surrogate");
  if (g < 0 || g >= 2 * s.d) fail(ErrorKind::InvalidArgument, "group index out of range");
}

Vector ridge_solve(const QuadraticSurrogate& s, const Vector& r, Index g, double ridge, bool printed_h) {
  Vector out(s.n);
  for (Index k = 0; k < s.n; ++k) {
    double denom = group_diag(s, k, g, printed_h) + ridge;
    if (!(denom > 0.0)) denom = 1e-10;
    out[k] = r[k] / denom;
  }
  if (!out.allFinite()) fail(ErrorKind::Numeric, "singular block system for group " + std::to_string(g + 1));
  return out;
}

// One majorise-minimise step over the active groups jointly. Inactive groups
// stay at zero; active group g gets ridge tau_g / |theta_g|.
Matrix joint_step(const QuadraticSurrogate& s, const Matrix& theta, const GroupWeights& w, bool printed_h) {
  const Index d = s.d;
  std::vector<Index> active;
  Vector ridge(2 * d);
  for (Index g = 0; g < 2 * d; ++g) {
    const double norm = theta.col(g).norm();
    if (norm == 0.0) continue;
    active.push_back(g);
    ridge[g] = weight_of(w, g, d) / norm;
  }
  Matrix out = Matrix::Zero(s.n, 2 * d);
  const auto m = static_cast<Index>(active.size());
  if (m == 0) return theta;
  Matrix a(m, m);
  Vector b(m);
  for (Index k = 0; k < s.n; ++k) {
    const Matrix& mk = s.curvature[static_cast<std::size_t>(k)];
    const Vector rhs = mk * s.expansion.row(k).transpose() + s.score.col(k);
    for (Index i = 0; i < m; ++i) {
      const Index gi = active[static_cast<std::size_t>(i)];
      for (Index j = 0; j < m; ++j) a(i, j) = mk(gi, active[static_cast<std::size_t>(j)]);
      a(i, i) += ridge[gi];
      if (printed_h && gi >= d) a(i, i) += (s.h - 1.0) * mk(gi, gi);
      b[i] = rhs[gi];
    }
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) return theta;
    const Vector v = llt.solve(b);
    for (Index i = 0; i < m; ++i) out(k, active[static_cast<std::size_t>(i)]) = v[i];
  }
  return out.allFinite() ? out : theta;
}

}  // namespace

Vector exact_block_solve(const Vector& r, const Vector& diag, double tau) {
  if (r.size() != diag.size()) fail(ErrorKind::InvalidArgument, "block sizes differ");
  if (!(tau > 0.0)) fail(ErrorKind::InvalidArgument, "exact block solve needs tau > 0");
  if ((diag.array() <= 0.0).any()) fail(ErrorKind::Numeric, "block diagonal is not positive");
  const double rn = r.norm();
  if (!(rn > tau)) return Vector::Zero(r.size());
  // phi(nu) = 1 / |r / (D nu + tau)| - 1 is increasing and exactly linear for constant D.
  double nu = (rn - tau) / diag.mean();
  for (int it = 0; it < 100; ++it) {
    double s = 0.0, ds = 0.0;
    for (Index k = 0; k < r.size(); ++k) {
      const double den = diag[k] * nu + tau;
      const double q = r[k] / den;
      s += q * q;
      ds -= 2.0 * q * q * diag[k] / den;
    }
    const double phi = 1.0 / std::sqrt(s) - 1.0;
    const double dphi = -0.5 * ds / (s * std::sqrt(s));
    double next = nu - phi / dphi;
    if (!(next > 0.0)) next = 0.5 * nu;
    const bool done = std::abs(next - nu) <= 1e-14 * std::max(1.0, nu);
    nu = next;
    if (done) break;
  }
  Vector out(r.size());
  for (Index k = 0; k < r.size(); ++k) out[k] = r[k] * nu / (diag[k] * nu + tau);
  return out;
}

Vector partial_residual(const QuadraticSurrogate& s, const Matrix& theta, Index g) {
  check_group(s, theta, g);
  Vector r(s.n);
  for (Index k = 0; k < s.n; ++k) {
    const Vector e = (theta.row(k) - s.expansion.row(k)).transpose();
    const double grad = s.score(g, k) - s.curvature[static_cast<std::size_t>(k)].row(g).dot(e);
    r[k] = grad + s.diagonal(k, g) * theta(k, g);
  }
  return r;
}

KktOutcome kkt_check(const QuadraticSurrogate& s, const Matrix& theta, Index g, double tau) {
  KktOutcome out;
  if (is_pinned(tau)) return out;
  Vector r = partial_residual(s, theta, g);
  if (r.norm() < tau) return out;
  out.zero = false;
  out.direction = std::move(r);
  return out;
}

Vector block_update(const QuadraticSurrogate& s, const Matrix& theta, Index g, double tau, double current_norm) {
  if (!(current_norm > 0.0)) fail(ErrorKind::InvalidArgument, "block update needs a positive current norm");
  return ridge_solve(s, partial_residual(s, theta, g), g, tau / current_norm, false);
}

Vector reactivate(const QuadraticSurrogate& s, const Matrix& theta, Index g, double tau, double delta) {
  if (!(delta > 0.0)) fail(ErrorKind::InvalidArgument, "reactivation needs a positive delta");
  return ridge_solve(s, partial_residual(s, theta, g), g, tau / delta, false);
}

double penalty_value(const Matrix& theta, const GroupWeights& w) {
  const Index d = w.tau1.size();
  double total = 0.0;
  for (Index g = 0; g < 2 * d; ++g) {
    const double norm = theta.col(g).norm();
    if (norm == 0.0) continue;
    const double tau = weight_of(w, g, d);
    if (is_pinned(tau)) return std::numeric_limits<double>::infinity();
    total += tau * norm;
  }
  return total;
}

double objective(const QuadraticSurrogate& s, const Matrix& theta, const GroupWeights& w) {
  return s.loss(theta) + penalty_value(theta, w);
}

double kkt_residual(const QuadraticSurrogate& s, const Matrix& theta, const GroupWeights& w) {
  const Matrix grad = point_gradient(s, theta);
  double worst = 0.0;
  for (Index g = 0; g < 2 * s.d; ++g) {
    const double tau = weight_of(w, g, s.d);
    const Vector gg = grad.row(g).transpose();
    const double norm = theta.col(g).norm();
    double r = 0.0;
    if (norm > 0.0) {
      if (is_pinned(tau)) return std::numeric_limits<double>::infinity();
      r = (gg - tau * theta.col(g) / norm).norm();
    } else if (!is_pinned(tau)) {
      r = std::max(gg.norm() - tau, 0.0);
    }
    worst = std::max(worst, r);
  }
  return worst;
}

SelectorResult run_selection(const QuadraticSurrogate& s, const PreliminaryFit& pre, const SelectorConfig& config) {
  if (pre.field.n() != s.n || pre.field.d() != s.d)
    fail(ErrorKind::InvalidArgument, "preliminary fit does not match the surrogate");
  Matrix init(s.n, 2 * s.d);
  init.leftCols(s.d) = pre.field.alpha;
  init.rightCols(s.d) = s.h * pre.field.beta;
  return run_selection_from(s, init, config);
}

SelectorResult run_selection_from(const QuadraticSurrogate& s, const Matrix& init, const SelectorConfig& config,
                                  const std::optional<GroupWeights>& fixed) {
  config.penalty.validate();
  if (!(config.convergence_threshold > 0.0)) fail(ErrorKind::InvalidArgument, "threshold must be positive");
  if (config.max_outer_iters < 1) fail(ErrorKind::InvalidArgument, "max_outer_iters must be positive");
  if (init.rows() != s.n || init.cols() != 2 * s.d) fail(ErrorKind::InvalidArgument, "initial theta has wrong shape");

  const Index n = s.n;
  const Index d = s.d;
  const Index p = 2 * d;
  const bool refresh = !fixed && config.penalty.kind == PenaltyKind::GroupScad;
  GroupWeights w = fixed ? *fixed : compute_weights(config.penalty, init.leftCols(d), s.h);
  if (w.tau1.size() != d || w.tau2.size() != d) fail(ErrorKind::InvalidArgument, "weights have wrong length");

  Matrix theta = init;
  Matrix grad = point_gradient(s, theta);
  const double stop = config.convergence_threshold * std::sqrt(static_cast<double>(n * d));

  SelectorResult result;
  Vector r(n);
  Vector next(n);
  Vector norms(p);
  Vector dblock(n);
  const bool exact = config.block_solver == BlockSolver::Exact;
  for (int iter = 1; iter <= config.max_outer_iters; ++iter) {
    if (refresh) w = compute_weights(config.penalty, theta.leftCols(d), s.h);
    for (Index g = 0; g < p; ++g) norms[g] = theta.col(g).norm();
    // Smallest nonzero norm of each kind at the start of the sweep.
    double delta[2] = {0.0, 0.0};
    for (Index g = 0; g < p; ++g) {
      double& slot = delta[g < d ? 0 : 1];
      if (norms[g] > 0.0 && (slot == 0.0 || norms[g] < slot)) slot = norms[g];
    }

    double change = 0.0;
    for (Index g = 0; g < p; ++g) {
      const double tau = weight_of(w, g, d);
      for (Index k = 0; k < n; ++k) r[k] = grad(g, k) + s.diagonal(k, g) * theta(k, g);
      const double rnorm = r.norm();
      if (is_pinned(tau) || rnorm < tau) {
        next.setZero();
      } else if (exact && tau > 0.0) {
        for (Index k = 0; k < n; ++k) dblock[k] = group_diag(s, k, g, config.printed_h_variant);
        next = exact_block_solve(r, dblock, tau);
      } else if (norms[g] > 0.0) {
        next = ridge_solve(s, r, g, tau / norms[g], config.printed_h_variant);
      } else if (tau == 0.0) {
        next = ridge_solve(s, r, g, 0.0, config.printed_h_variant);
      } else if (rnorm > tau && config.reactivation && delta[g < d ? 0 : 1] > 0.0) {
        next = ridge_solve(s, r, g, tau / delta[g < d ? 0 : 1], config.printed_h_variant);
      } else {
        next.setZero();
      }
      double moved = 0.0;
      for (Index k = 0; k < n; ++k) {
        const double step = next[k] - theta(k, g);
        if (step == 0.0) continue;
        moved += step * step;
        grad.col(k).noalias() -= step * s.curvature[static_cast<std::size_t>(k)].col(g);
        theta(k, g) = next[k];
      }
      change += std::sqrt(moved);
    }

    double value = loss_from_gradient(s, theta, grad) + penalty_value(theta, w);
    if (config.joint_step) {
      Matrix trial = joint_step(s, theta, w, config.printed_h_variant);
      Matrix trial_grad = point_gradient(s, trial);
      const double trial_value = loss_from_gradient(s, trial, trial_grad) + penalty_value(trial, w);
      if (trial_value < value) {
        for (Index g = 0; g < p; ++g) change += (trial.col(g) - theta.col(g)).norm();
        theta.swap(trial);
        grad.swap(trial_grad);
        value = trial_value;
      }
    }
    result.objective_trace.push_back(value);
    result.iters = iter;
    if (change < stop) {
      result.converged = true;
      break;
    }
    if (theta.isZero(0.0)) {
      bool kkt_at_zero = true;
      for (Index g = 0; g < p && kkt_at_zero; ++g) {
        const double tau = weight_of(w, g, d);
        if (!is_pinned(tau) && grad.row(g).norm() > tau) kkt_at_zero = false;
      }
      if (kkt_at_zero) {
        result.converged = true;
        break;
      }
    }
  }

  result.kkt_residual = kkt_residual(s, theta, w);
  if (config.zero_stray_beta)
    for (Index j = 0; j < d; ++j)
      if (theta.col(j).isZero(0.0)) theta.col(d + j).setZero();

  result.weights = w;
  result.field.h = s.h;
  result.field.alpha = theta.leftCols(d);
  result.field.beta = theta.rightCols(d) / s.h;
  for (Index j = 0; j < d; ++j) {
    if (!result.field.alpha.col(j).isZero(0.0)) result.active_alpha.push_back(j);
    if (!result.field.beta.col(j).isZero(0.0)) result.active_beta.push_back(j);
  }
  return result;
}

}  // namespace gsvcm
