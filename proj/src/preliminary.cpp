#include "gsvcm/preliminary.hpp"

#include "gsvcm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gsvcm {

namespace {

constexpr double kFunctionalDof = 1.028571;

double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

double l1_penalty(const Vector& v, Index d, double lambda1, double lambda2) {
  return lambda1 * v.head(d).lpNorm<1>() + lambda2 * v.tail(d).lpNorm<1>();
}

// Adds 1e-8 trace/p to the diagonal when the matrix is not numerically
// positive definite (failed Cholesky or a squared pivot below 1e-10).
void regularise_curvature(Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    const Vector pivots = llt.matrixLLT().diagonal();
    ok = pivots.minCoeff() * pivots.minCoeff() >= 1e-10;
  }
  if (!ok) {
    const double trace = m.trace();
    m.diagonal().array() += 1e-8 * trace / static_cast<double>(m.rows());
  }
}

// Maximises g'(w - v) - 0.5 (w - v)' M (w - v) - sum lambda_c |w_c| from w = v.
Vector solve_l1_quadratic(const Matrix& m, const Vector& g, const Vector& v, Index d, double lambda1,
                          double lambda2, const std::vector<bool>& fixed, const LocalFitOptions& options) {
  const Index p = v.size();
  Vector w = v;
  Vector r = g;
  std::vector<Index> free;
  free.reserve(p);
  for (Index c = 0; c < p; ++c) {
    if (!fixed.empty() && fixed[c]) continue;
    if (m(c, c) <= 0.0) continue;
    free.push_back(c);
  }
  auto sweep = [&](bool full) {
    double max_delta = 0.0;
    for (Index c : free) {
      if (!full && w[c] == 0.0) continue;
      const double mcc = m(c, c);
      const double lambda = c < d ? lambda1 : lambda2;
      const double next = soft_threshold(mcc * w[c] + r[c], lambda) / mcc;
      const double delta = next - w[c];
      if (delta != 0.0) {
        r.noalias() -= m.col(c) * delta;
        w[c] = next;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    return max_delta;
  };
  int sweeps = 0;
  while (sweeps < options.max_inner_sweeps) {
    const double full_delta = sweep(true);
    ++sweeps;
    if (full_delta < options.inner_tolerance) break;
    while (sweeps < options.max_inner_sweeps) {
      const double delta = sweep(false);
      ++sweeps;
      if (delta < options.inner_tolerance) break;
    }
  }
  return w;
}

}  // namespace

double penalised_local_objective(const Dataset& data, const Family& family, const LocalDesign& design,
                                 double lambda1, double lambda2, const Vector& v) {
  return local_loglik(data, family, design, v) - l1_penalty(v, data.d(), lambda1, lambda2);
}

LocalFitResult fit_local(const Dataset& data, const Family& family, const LocalDesign& design, double lambda1,
                         double lambda2, const Vector& init, const std::vector<bool>& fixed,
                         const LocalFitOptions& options) {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0))
    fail(ErrorKind::InvalidArgument, "LASSO tuning parameters must be nonnegative");
  const Index d = data.d();
  if (init.size() != 2 * d) fail(ErrorKind::InvalidArgument, "initial local coefficients have wrong length");
  if (!fixed.empty() && static_cast<Index>(fixed.size()) != 2 * d)
    fail(ErrorKind::InvalidArgument, "fixed mask has wrong length");
  if (design.size() == 0)
    fail(ErrorKind::Numeric, "no observations within one bandwidth of u = " + std::to_string(design.center));

  LocalFitResult result;
  result.v = init;
  double objective = penalised_local_objective(data, family, design, lambda1, lambda2, result.v);
  result.status.status = FitStatus::MaxIters;
  for (int outer = 1; outer <= options.max_outer; ++outer) {
    LocalExpansion e = local_expand(data, family, design, result.v);
    regularise_curvature(e.neg_hessian);
    const Vector target =
        solve_l1_quadratic(e.neg_hessian, e.score, result.v, d, lambda1, lambda2, fixed, options);
    const Vector step = target - result.v;
    double t = 1.0;
    Vector candidate = target;
    double cand_obj = penalised_local_objective(data, family, design, lambda1, lambda2, candidate);
    while (cand_obj < objective - 1e-12 * (1.0 + std::abs(objective))) {
      t *= 0.5;
      if (t < 1e-10) {
        candidate = result.v;
        cand_obj = objective;
        break;
      }
      candidate = result.v + t * step;
      cand_obj = penalised_local_objective(data, family, design, lambda1, lambda2, candidate);
    }
    const double change = t < 1e-10 ? 0.0 : t * step.cwiseAbs().maxCoeff();
    result.v = candidate;
    objective = cand_obj;
    result.status.iterations = outer;
    if (change < options.tolerance) {
      result.status.status = FitStatus::Converged;
      break;
    }
  }
  result.objective = objective;
  return result;
}

PointFit preliminary_fit_point(const Dataset& data, const Family& family, const Kernel& kernel, Index k,
                               double lambda1, double lambda2, const Vector& init_a, const Vector& init_b,
                               const LocalFitOptions& options) {
  if (k < 0 || k >= data.n()) fail(ErrorKind::InvalidArgument, "fitting point index out of range");
  const auto design = LocalDesign::at_point(data, kernel, k);
  const double h = kernel.bandwidth();
  const auto fit = fit_local(data, family, design, lambda1, lambda2, pack_local(init_a, init_b, h), {}, options);
  const Index d = data.d();
  return PointFit{fit.v.head(d), fit.v.tail(d) / h, fit.status};
}

Index PreliminaryFit::max_iter_points() const {
  return std::count_if(per_point_status.begin(), per_point_status.end(),
                       [](const PointStatus& s) { return s.status == FitStatus::MaxIters; });
}

PreliminaryFit preliminary_fit(const Dataset& data, const Family& family, const Kernel& kernel, double lambda1,
                               double lambda2, const PreliminaryOptions& options) {
  const Index n = data.n();
  const Index d = data.d();
  const double h = kernel.bandwidth();
  PreliminaryFit out;
  out.lambda1 = lambda1;
  out.lambda2 = lambda2;
  out.field = CoefficientField{Matrix::Zero(n, d), Matrix::Zero(n, d), h};
  out.per_point_status.resize(static_cast<std::size_t>(n));

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return data.u()[a] < data.u()[b]; });

  auto store = [&](Index k, const LocalFitResult& fit) {
    out.field.alpha.row(k) = fit.v.head(d).transpose();
    out.field.beta.row(k) = (fit.v.tail(d) / h).transpose();
    out.per_point_status[static_cast<std::size_t>(k)] = fit.status;
  };

  if (options.warm_start) {
    Vector init = Vector::Zero(2 * d);
    for (Index k : order) {
      const auto design = LocalDesign::at_point(data, kernel, k);
      const auto fit = fit_local(data, family, design, lambda1, lambda2, init, {}, options.local);
      store(k, fit);
      init = fit.v;
    }
  } else {
    parallel_for(static_cast<std::size_t>(n), options.threads, [&](std::size_t i) {
      const Index k = static_cast<Index>(i);
      const auto design = LocalDesign::at_point(data, kernel, k);
      store(k, fit_local(data, family, design, lambda1, lambda2, Vector::Zero(2 * d), {}, options.local));
    });
  }
  out.bic = preliminary_bic(data, family, out.field);
  return out;
}

double preliminary_bic(const Dataset& data, const Family& family, const CoefficientField& field) {
  const Index n = data.n();
  double loglik = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double s = data.x().row(i).dot(field.alpha.row(i));
    loglik += family.loglik_at(s, data.y()[i]);
  }
  double df = 0.0;
  for (Index j = 0; j < field.d(); ++j) {
    if (field.alpha.col(j).isZero(0.0)) continue;
    df += field.beta.col(j).isZero(0.0) ? 1.0 : kFunctionalDof / field.h;
  }
  return -2.0 * loglik + std::log(static_cast<double>(n)) * df;
}

PreliminaryTuning select_preliminary_tuning(const Dataset& data, const Family& family, const Kernel& kernel,
                                            const std::vector<double>& grid1, const std::vector<double>& grid2,
                                            unsigned threads, const PreliminaryOptions& options) {
  if (grid1.empty()) fail(ErrorKind::InvalidArgument, "preliminary lambda grid is empty");
  std::vector<BicCell> cells;
  for (double l1 : grid1) {
    if (!(l1 >= 0.0)) fail(ErrorKind::InvalidArgument, "preliminary lambda values must be nonnegative");
    if (grid2.empty()) {
      cells.push_back({l1, l1, 0.0});
      continue;
    }
    for (double l2 : grid2) {
      if (!(l2 >= 0.0)) fail(ErrorKind::InvalidArgument, "preliminary lambda values must be nonnegative");
      cells.push_back({l1, l2, 0.0});
    }
  }
  std::vector<PreliminaryFit> fits(cells.size());
  parallel_for(cells.size(), threads, [&](std::size_t c) {
    fits[c] = preliminary_fit(data, family, kernel, cells[c].lambda1, cells[c].lambda2, options);
    cells[c].bic = fits[c].bic;
  });
  std::size_t best = 0;
  for (std::size_t c = 1; c < cells.size(); ++c) {
    if (cells[c].bic < cells[best].bic) best = c;
  }
  PreliminaryTuning out;
  out.lambda1 = cells[best].lambda1;
  out.lambda2 = cells[best].lambda2;
  out.table = cells;
  out.best = std::move(fits[best]);
  return out;
}

double default_bandwidth(Index n, Index d) {
  if (n < 2) fail(ErrorKind::InvalidArgument, "bandwidth rule needs n >= 2");
  if (d < 2) fail(ErrorKind::InvalidArgument, "bandwidth rule needs d >= 2 (log 1 = 0); supply h explicitly");
  return 0.75 * std::pow(std::log(static_cast<double>(d)) / static_cast<double>(n), 0.2);
}

std::vector<double> default_preliminary_grid(const Dataset& data, const Family& family, const Kernel& kernel) {
  double top = 0.0;
  const Vector zero = Vector::Zero(2 * data.d());
  for (Index k = 0; k < data.n(); ++k) {
    const auto design = LocalDesign::at_point(data, kernel, k);
    top = std::max(top, local_score(data, family, design, zero).cwiseAbs().maxCoeff());
  }
  if (!(top > 0.0)) top = 1.0;
  return {0.4 * top, 0.2 * top, 0.1 * top, 0.05 * top};
}

}  // namespace gsvcm
