#pragma once

// GIC selection of the second-stage tuning pair.

#include "gsvcm/selector.hpp"
#include "gsvcm/structure.hpp"
#include "gsvcm/surrogate.hpp"

#include <utility>
#include <vector>

namespace gsvcm {

inline constexpr double kFunctionalDf = 1.028571;

// 2 ln(ln n) ln(1.028571 d / h) (k1 + 1.028571 k2 / h)
double gic_penalty(Index n, Index d, double h, Index k1, Index k2);

// -2 sum_i l(m_i, y_i) + gic_penalty, m_i fitted at the training knots.
double gic(const Dataset& data, const Family& family, const StructureReport& report, double h, Index d);

struct GicCell {
  double lambda = 0.0;
  double lambda_star = 0.0;
  double gic = 0.0;
  Index k1 = 0;
  Index k2 = 0;
  bool converged = false;
};

struct GicTable {
  std::vector<GicCell> cells;
  std::size_t argmin = 0;
};

struct TuningResult {
  GicTable table;
  SelectorResult best;
  StructureReport report;
};

using LambdaGrid = std::vector<std::pair<double, double>>;

// Runs the selector for every grid cell over the shared surrogate and keeps the
// converged cell with the smallest GIC. Ties go to the larger lambda, then the
// larger lambda_star.
TuningResult select_tuning(const Dataset& data, const Family& family, const QuadraticSurrogate& s,
                           const PreliminaryFit& pre, const PenaltySpec& spec_template, const LambdaGrid& grid,
                           const SelectorConfig& config, unsigned threads = 1);

// Largest partial-residual norm over alpha groups at theta = 0, scaled the way
// the penalty scales its weights (multiplied by |alpha~_j|^kappa for the
// adaptive penalty). No lambda above this keeps any alpha group.
double lambda_max(const QuadraticSurrogate& s, const PreliminaryFit& pre, const PenaltySpec& spec);

// Same bound for the h beta groups, taken at theta = (alpha~, 0) and scaled by
// D~_j^kappa for the adaptive penalty.
double lambda_star_max(const QuadraticSurrogate& s, const PreliminaryFit& pre, const PenaltySpec& spec);

enum class GridScale {
  RelativeToMax,  // fractions of lambda_max / lambda_star_max
  Rate,           // multiples of sqrt(log d / n)
};

struct GridOptions {
  GridScale scale = GridScale::RelativeToMax;
  int points = 10;
  double low = 0.001;
  double high = 0.3;
  int star_points = 10;  // lambda_star values when two-dimensional
  double star_low = 0.001;
  double star_high = 0.3;
  bool two_dimensional = true;  // cross lambda with lambda_star instead of tying them

  // 8 values in [0.01, 2] sqrt(log d / n) with lambda_star = lambda.
  static GridOptions rate_tied();
};

std::vector<double> log_spaced(double low, double high, int points);

LambdaGrid default_grid(const QuadraticSurrogate& s, const PreliminaryFit& pre, const PenaltySpec& spec,
                        const GridOptions& options = {});

// Cross product of two value lists (lambda_star empty ties lambda_star = lambda).
LambdaGrid make_grid(const std::vector<double>& lambdas, const std::vector<double>& lambda_stars = {});

}  // namespace gsvcm
