#pragma once

// Stage-one estimator: LASSO-penalised local log-likelihood maximised at
// every sample point, plus BIC selection of its tuning pair.

#include "gsvcm/core.hpp"
#include "gsvcm/local_likelihood.hpp"

#include <vector>

namespace gsvcm {

enum class FitStatus { Converged, MaxIters };

struct PointStatus {
  FitStatus status = FitStatus::Converged;
  int iterations = 0;
};

struct LocalFitOptions {
  double tolerance = 1e-6;  // max coordinate change between outer steps
  int max_outer = 200;
  int max_inner_sweeps = 5000;
  double inner_tolerance = 1e-10;
};

struct LocalFitResult {
  Vector v;  // (a, h b)
  PointStatus status;
  double objective = 0.0;  // penalised local log-likelihood at v
};

// Maximises L(v) - lambda1 |a|_1 - lambda2 |h b|_1 by iterated quadratic
// expansion, each expansion solved by cyclic coordinate soft-thresholding
// followed by a backtracking step that keeps the objective from falling.
// Coordinates flagged in `fixed` keep their initial value.
LocalFitResult fit_local(const Dataset& data, const Family& family, const LocalDesign& design, double lambda1,
                         double lambda2, const Vector& init, const std::vector<bool>& fixed = {},
                         const LocalFitOptions& options = {});

double penalised_local_objective(const Dataset& data, const Family& family, const LocalDesign& design,
                                 double lambda1, double lambda2, const Vector& v);

struct PointFit {
  Vector a;
  Vector b;
  PointStatus status;
};

PointFit preliminary_fit_point(const Dataset& data, const Family& family, const Kernel& kernel, Index k,
                               double lambda1, double lambda2, const Vector& init_a, const Vector& init_b,
                               const LocalFitOptions& options = {});

struct PreliminaryFit {
  CoefficientField field;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double bic = 0.0;
  std::vector<PointStatus> per_point_status;

  Index max_iter_points() const;
};

struct PreliminaryOptions {
  bool warm_start = true;
  unsigned threads = 1;  // used only when warm starts are off
  LocalFitOptions local;
};

PreliminaryFit preliminary_fit(const Dataset& data, const Family& family, const Kernel& kernel, double lambda1,
                               double lambda2, const PreliminaryOptions& options = {});

// -2 sum_i l(m_i, y_i) + log(n) df, with m_i from the fit at U_i and df
// counting 1.028571/h for covariates whose derivative column is nonzero and
// 1 for the remaining nonzero covariates.
double preliminary_bic(const Dataset& data, const Family& family, const CoefficientField& field);

struct BicCell {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double bic = 0.0;
};

struct PreliminaryTuning {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::vector<BicCell> table;
  PreliminaryFit best;
};

// Empty grid2 ties lambda2 to lambda1.
PreliminaryTuning select_preliminary_tuning(const Dataset& data, const Family& family, const Kernel& kernel,
                                            const std::vector<double>& grid1, const std::vector<double>& grid2,
                                            unsigned threads = 1, const PreliminaryOptions& options = {});

// 0.75 ((log d) / n)^0.2
double default_bandwidth(Index n, Index d);

// Candidate lambda1 values scaled to the largest local score at zero.
std::vector<double> default_preliminary_grid(const Dataset& data, const Family& family, const Kernel& kernel);

}  // namespace gsvcm
