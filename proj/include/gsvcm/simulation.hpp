#pragma once

// Data generators for the simulated examples, the oracle estimator and the
// evaluation metrics.

#include "gsvcm/pipeline.hpp"

#include <cstdint>
#include <array>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace gsvcm {

enum class ScenarioKind { Example51, Example52, Example53 };
enum class VcModel { I, II, III };
enum class IndexDistribution { Uniform, Beta41 };

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::Example51;
  Index n = 200;
  Index d = 50;  // ex52 scenarios always use 7
  VcModel model = VcModel::I;
  IndexDistribution u_dist = IndexDistribution::Uniform;
  double sigma = 1.5;
  std::uint64_t seed = 1;

  static ScenarioSpec example51(Index d = 50, Index n = 200, std::uint64_t seed = 1);
  static ScenarioSpec example52(VcModel model, IndexDistribution u_dist = IndexDistribution::Uniform,
                                Index n = 200, std::uint64_t seed = 1);
  static ScenarioSpec example53(Index d = 50, Index n = 150, std::uint64_t seed = 1);

  void validate() const;
  FamilyKind family() const noexcept;
  std::string name() const;
};

// Parses ex51, ex52-I, ex52-II, ex52-III, ex53.
ScenarioSpec parse_scenario(const std::string& name);

struct TrueCoefficient {
  VerdictKind kind = VerdictKind::Zero;
  double value = 0.0;                  // Constant
  std::function<double(double)> curve;  // Varying

  double at(double u) const { return kind == VerdictKind::Varying ? curve(u) : value; }
};

struct Truth {
  std::vector<TrueCoefficient> coefficients;

  Index d() const noexcept { return static_cast<Index>(coefficients.size()); }
  Vector at(double u) const;
  Matrix at_knots(const Vector& u) const;  // n x d
  std::vector<VerdictKind> structure() const;
};

Truth scenario_truth(const ScenarioSpec& spec);

struct Simulated {
  Dataset data;
  Truth truth;
};

// Deterministic per spec.seed.
Simulated generate(const ScenarioSpec& spec);

// SplitMix64 finaliser; per-replication seeds are mix(seed + rep).
std::uint64_t mix_seed(std::uint64_t value) noexcept;

// One-step or exact oracle estimator with the true structure imposed.
enum class OracleMode {
  Surrogate,  // maximise the unpenalised quadratic surrogate on the free coordinates
  Exact,      // restricted local likelihood maximised to convergence
};

struct OracleFit {
  CoefficientField field;
  Vector constants;  // c_j for Constant coordinates, 0 elsewhere
};

OracleFit oracle_fit(const QuadraticSurrogate& s, const std::vector<VerdictKind>& structure);
OracleFit oracle_fit_exact(const Dataset& data, const Family& family, const Kernel& kernel,
                           const std::vector<VerdictKind>& structure);

// Restricted local fit at an arbitrary centre: Zero coefficients pinned at 0,
// Constant ones pinned at `constants`, Varying ones free with a local slope.
Vector restricted_local_fit(const Dataset& data, const Family& family, const Kernel& kernel, double center,
                            const std::vector<VerdictKind>& structure, const Vector& constants);

enum class SelectionCategory { Correct, UnderSelected, UnderSpecified, OverSelected, OverSpecified, Others };
inline constexpr int kCategoryCount = 6;
std::string_view category_name(SelectionCategory c) noexcept;

SelectionCategory tally(const StructureReport& report, const Truth& truth);
SelectionCategory tally(const std::vector<VerdictKind>& reported, const std::vector<VerdictKind>& truth);

struct SelectionTally {
  std::array<Index, kCategoryCount> counts{};
  Index total = 0;

  void add(SelectionCategory c) {
    ++counts[static_cast<std::size_t>(c)];
    ++total;
  }
  double rate(SelectionCategory c) const {
    return total == 0 ? 0.0 : static_cast<double>(counts[static_cast<std::size_t>(c)]) / static_cast<double>(total);
  }
};

// (1/n) sum_k (est_k - truth(U_k))^2
double mise(const Vector& curve_est, const std::function<double(double)>& truth_fn, const Vector& u);
double mse(double c_est, double c_true);
// 100 sum |est - a| / sum |oracle - a| over all knots and covariates.
double ree(const Matrix& est, const Matrix& oracle, const Matrix& truth);
// (100 / m) sum |pred - y| / |y|
double mrpe(const Vector& predictions, const Vector& actuals);

// Coefficient matrix (n x d) implied by a report at its own knots.
Matrix report_coefficients(const StructureReport& report);

// ---- Monte-Carlo harness ----

struct HarnessOptions {
  ScenarioSpec scenario;
  Index reps = 100;
  std::vector<PenaltyKind> penalties{PenaltyKind::GroupScad, PenaltyKind::AdaptiveGroupLasso};
  int kappa = 1;
  double a0 = 3.7;
  PipelineOptions pipeline;  // family and penalty are filled in per scenario
  OracleMode oracle = OracleMode::Surrogate;
  unsigned threads = 1;     // replications run in parallel; fits inside run single-threaded
};

struct PenaltyOutcome {
  PenaltyKind penalty = PenaltyKind::GroupScad;
  SelectionCategory category = SelectionCategory::Others;
  std::vector<VerdictKind> structure;
  Vector curve_mise;     // per truly varying coefficient; a zeroed estimate still counts
  Vector constant_se;    // per truly constant coefficient
  Vector constants;      // estimates for the truly constant coefficients
  double ree = 0.0;
  double lambda = 0.0;
  double lambda_star = 0.0;
};

struct ReplicationOutcome {
  Index rep = 0;
  std::uint64_t seed = 0;
  std::vector<PenaltyOutcome> fits;
  Vector oracle_mise;
  Vector oracle_se;
  Vector oracle_constants;
  Vector true_constants;
  double seconds = 0.0;
};

ReplicationOutcome run_replication(const HarnessOptions& options, Index rep);

struct HarnessResult {
  HarnessOptions options;
  std::vector<ReplicationOutcome> reps;
  std::vector<Index> varying;   // truly varying coefficient indices
  std::vector<Index> constant;  // truly constant coefficient indices

  SelectionTally tally_for(PenaltyKind p) const;
  // Mean over replications of the per-rep MISE / squared error.
  double mean_curve_mise(PenaltyKind p, std::size_t which) const;
  double mean_constant_mse(PenaltyKind p, std::size_t which) const;
  double mean_oracle_mise(std::size_t which) const;
  double mean_oracle_mse(std::size_t which) const;
  double median_ree(PenaltyKind p) const;
};

HarnessResult run_harness(const HarnessOptions& options);

// table1.csv, table2.csv and ree.csv under `dir`.
void write_tables(const HarnessResult& result, const std::string& dir);

// ---- Rolling one-step prediction ----

struct RollingSpec {
  Index total = 730;
  Index train = 700;
  std::uint64_t seed = 1;
};

// Poisson series on an equally spaced time index with an intercept, two
// varying, one constant and four null covariates.
Simulated generate_rolling_series(const RollingSpec& spec);

struct RollingOutcome {
  Vector actual;
  Vector selected;  // predictions from the selected structure
  Vector full;      // predictions from the all-varying model
  double mrpe_selected = 0.0;
  double mrpe_full = 0.0;
  StructureReport report;
};

// Selects the structure on the first `train` rows, then predicts each later
// row from a restricted local fit centred at its index value using every
// earlier row, for both the selected and the all-varying structure.
RollingOutcome rolling_prediction(const Dataset& series, Index train, const PipelineOptions& options);

}  // namespace gsvcm
