#include "gsvcm/tuning.hpp"

#include "gsvcm/parallel.hpp"
#include "gsvcm/penalties.hpp"

#include <cmath>
#include <optional>

namespace gsvcm {

double gic_penalty(Index n, Index d, double h, Index k1, Index k2) {
  if (n < 3) fail(ErrorKind::InvalidArgument, "GIC needs n >= 3");
  if (!(h > 0.0)) fail(ErrorKind::InvalidArgument, "bandwidth must be positive");
  const double nn = static_cast<double>(n);
  return 2.0 * std::log(std::log(nn)) * std::log(kFunctionalDf * static_cast<double>(d) / h) *
         (static_cast<double>(k1) + kFunctionalDf * static_cast<double>(k2) / h);
}

double gic(const Dataset& data, const Family& family, const StructureReport& report, double h, Index d) {
  if (report.d() != data.d() || report.knots.size() != data.n())
    fail(ErrorKind::InvalidArgument, "report does not belong to this dataset");
  double ll = 0.0;
  for (Index i = 0; i < data.n(); ++i) {
    const double m = fitted_mean(report, family, i, data.x().row(i).transpose());
    ll += family.loglik(m, data.y()[i]);
  }
  return -2.0 * ll + gic_penalty(data.n(), d, h, report.k1, report.k2);
}

TuningResult select_tuning(const Dataset& data, const Family& family, const QuadraticSurrogate& s,
                           const PreliminaryFit& pre, const PenaltySpec& spec_template, const LambdaGrid& grid,
                           const SelectorConfig& config, unsigned threads) {
  if (grid.empty()) fail(ErrorKind::InvalidArgument, "empty tuning grid");
  struct Outcome {
    GicCell cell;
    std::optional<SelectorResult> fit;
    std::optional<StructureReport> report;
  };
  std::vector<Outcome> outcomes(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t c) {
    SelectorConfig cfg = config;
    cfg.penalty = spec_template.with_lambdas(grid[c].first, grid[c].second);
    SelectorResult fit = run_selection(s, pre, cfg);
    StructureReport report = classify(fit, data.u(), family, cfg.penalty);
    Outcome& o = outcomes[c];
    o.cell.lambda = grid[c].first;
    o.cell.lambda_star = grid[c].second;
    o.cell.k1 = report.k1;
    o.cell.k2 = report.k2;
    o.cell.converged = fit.converged;
    o.cell.gic = gic(data, family, report, s.h, s.d);
    o.fit = std::move(fit);
    o.report = std::move(report);
  });

  TuningResult result;
  std::optional<std::size_t> best;
  for (std::size_t c = 0; c < outcomes.size(); ++c) {
    const GicCell& cell = outcomes[c].cell;
    result.table.cells.push_back(cell);
    if (!cell.converged || !std::isfinite(cell.gic)) continue;
    if (!best) {
      best = c;
      continue;
    }
    const GicCell& b = outcomes[*best].cell;
    const bool better = cell.gic < b.gic ||
                        (cell.gic == b.gic && (cell.lambda > b.lambda ||
                                               (cell.lambda == b.lambda && cell.lambda_star > b.lambda_star)));
    if (better) best = c;
  }
  if (!best) fail(ErrorKind::TuningFailure, "no tuning cell converged");
  result.table.argmin = *best;
  result.best = std::move(*outcomes[*best].fit);
  result.report = std::move(*outcomes[*best].report);
  return result;
}

double lambda_max(const QuadraticSurrogate& s, const PreliminaryFit& pre, const PenaltySpec& spec) {
  const Matrix zero = Matrix::Zero(s.n, 2 * s.d);
  const Matrix grad = s.gradient(zero);  // n x 2d
  double top = 0.0;
  for (Index j = 0; j < s.d; ++j) {
    double r = grad.col(j).norm();
    if (spec.kind == PenaltyKind::AdaptiveGroupLasso) r *= std::pow(pre.field.alpha.col(j).norm(), spec.kappa);
    top = std::max(top, r);
  }
  return top;
}

double lambda_star_max(const QuadraticSurrogate& s, const PreliminaryFit& pre, const PenaltySpec& spec) {
  Matrix theta = Matrix::Zero(s.n, 2 * s.d);
  theta.leftCols(s.d) = pre.field.alpha;
  const Matrix grad = s.gradient(theta);
  double top = 0.0;
  for (Index j = 0; j < s.d; ++j) {
    double r = grad.col(s.d + j).norm();
    if (spec.kind == PenaltyKind::AdaptiveGroupLasso) r *= std::pow(deviation(pre.field.alpha.col(j)), spec.kappa);
    top = std::max(top, r);
  }
  return top;
}

std::vector<double> log_spaced(double low, double high, int points) {
  if (points < 1 || !(low > 0.0) || !(high >= low)) fail(ErrorKind::InvalidArgument, "invalid log-spaced range");
  std::vector<double> out;
  if (points == 1) return {high};
  const double step = std::log(high / low) / (points - 1);
  for (int i = 0; i < points; ++i) out.push_back(high * std::exp(-step * i));
  return out;
}

LambdaGrid make_grid(const std::vector<double>& lambdas, const std::vector<double>& lambda_stars) {
  LambdaGrid grid;
  for (double l : lambdas) {
    if (lambda_stars.empty()) {
      grid.emplace_back(l, l);
      continue;
    }
    for (double ls : lambda_stars) grid.emplace_back(l, ls);
  }
  return grid;
}

GridOptions GridOptions::rate_tied() {
  GridOptions o;
  o.scale = GridScale::Rate;
  o.points = 8;
  o.low = 0.01;
  o.high = 2.0;
  o.two_dimensional = false;
  return o;
}

LambdaGrid default_grid(const QuadraticSurrogate& s, const PreliminaryFit& pre, const PenaltySpec& spec,
                        const GridOptions& options) {
  double top = 1.0;
  double star_top = 1.0;
  if (options.scale == GridScale::Rate) {
    const double n = static_cast<double>(s.n);
    top = star_top = std::sqrt(std::log(static_cast<double>(std::max<Index>(s.d, 2))) / n);
  } else {
    top = lambda_max(s, pre, spec);
    if (!(top > 0.0)) top = 1.0;
    if (options.two_dimensional) {
      star_top = lambda_star_max(s, pre, spec);
      if (!(star_top > 0.0)) star_top = 1.0;
    }
  }
  const auto values = log_spaced(options.low * top, options.high * top, options.points);
  if (!options.two_dimensional) return make_grid(values);
  return make_grid(values, log_spaced(options.star_low * star_top, options.star_high * star_top, options.star_points));
}

}  // namespace gsvcm
