#include "gsvcm/simulation.hpp"

#include "gsvcm/local_likelihood.hpp"
#include "gsvcm/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

namespace gsvcm {

namespace {

constexpr double kPi = std::numbers::pi;

TrueCoefficient varying(std::function<double(double)> f) {
  TrueCoefficient c;
  c.kind = VerdictKind::Varying;
  c.curve = std::move(f);
  return c;
}

TrueCoefficient constant(double v) {
  TrueCoefficient c;
  c.kind = VerdictKind::Constant;
  c.value = v;
  return c;
}

// Rows of an AR(1)-correlated standard normal vector, built recursively
// (the triangular factor of rho^|i-j|).
void ar_normal(std::mt19937_64& rng, double rho, Eigen::Ref<Eigen::RowVectorXd> out) {
  std::normal_distribution<double> z(0.0, 1.0);
  const double scale = std::sqrt(1.0 - rho * rho);
  for (Index j = 0; j < out.size(); ++j) out[j] = j == 0 ? z(rng) : rho * out[j - 1] + scale * z(rng);
}

double draw_u(std::mt19937_64& rng, IndexDistribution dist) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double v = unif(rng);
  return dist == IndexDistribution::Beta41 ? std::pow(v, 0.25) : v;
}

}  // namespace

ScenarioSpec ScenarioSpec::example51(Index d, Index n, std::uint64_t seed) {
  ScenarioSpec s;
  s.kind = ScenarioKind::Example51;
  s.d = d;
  s.n = n;
  s.seed = seed;
  return s;
}

ScenarioSpec ScenarioSpec::example52(VcModel model, IndexDistribution u_dist, Index n, std::uint64_t seed) {
  ScenarioSpec s;
  s.kind = ScenarioKind::Example52;
  s.model = model;
  s.u_dist = u_dist;
  s.d = 7;
  s.n = n;
  s.seed = seed;
  return s;
}

ScenarioSpec ScenarioSpec::example53(Index d, Index n, std::uint64_t seed) {
  ScenarioSpec s;
  s.kind = ScenarioKind::Example53;
  s.d = d;
  s.n = n;
  s.seed = seed;
  return s;
}

void ScenarioSpec::validate() const {
  if (n < 10) fail(ErrorKind::InvalidArgument, "scenario needs n >= 10");
  const Index min_d = kind == ScenarioKind::Example51 ? 5 : 3;
  if (kind != ScenarioKind::Example52 && d < min_d)
    fail(ErrorKind::InvalidArgument, "scenario needs d >= " + std::to_string(min_d));
  if (!(sigma > 0.0)) fail(ErrorKind::InvalidArgument, "sigma must be positive");
}

FamilyKind ScenarioSpec::family() const noexcept {
  switch (kind) {
    case ScenarioKind::Example51: return FamilyKind::PoissonLog;
    case ScenarioKind::Example52: return FamilyKind::GaussianIdentity;
    case ScenarioKind::Example53: return FamilyKind::BernoulliLogit;
  }
  return FamilyKind::GaussianIdentity;
}

std::string ScenarioSpec::name() const {
  switch (kind) {
    case ScenarioKind::Example51: return "ex51";
    case ScenarioKind::Example53: return "ex53";
    case ScenarioKind::Example52:
      return model == VcModel::I ? "ex52-I" : model == VcModel::II ? "ex52-II" : "ex52-III";
  }
  return "";
}

ScenarioSpec parse_scenario(const std::string& name) {
  if (name == "ex51") return ScenarioSpec::example51();
  if (name == "ex52-I") return ScenarioSpec::example52(VcModel::I);
  if (name == "ex52-II") return ScenarioSpec::example52(VcModel::II);
  if (name == "ex52-III") return ScenarioSpec::example52(VcModel::III);
  if (name == "ex53") return ScenarioSpec::example53();
  fail(ErrorKind::InvalidArgument, "unknown scenario '" + name + "'");
}

Vector Truth::at(double u) const {
  Vector a(d());
  for (Index j = 0; j < d(); ++j) a[j] = coefficients[static_cast<std::size_t>(j)].at(u);
  return a;
}

Matrix Truth::at_knots(const Vector& u) const {
  Matrix a(u.size(), d());
  for (Index k = 0; k < u.size(); ++k) a.row(k) = at(u[k]).transpose();
  return a;
}

std::vector<VerdictKind> Truth::structure() const {
  std::vector<VerdictKind> out;
  for (const auto& c : coefficients) out.push_back(c.kind);
  return out;
}

Truth scenario_truth(const ScenarioSpec& spec) {
  spec.validate();
  Truth t;
  const Index d = spec.kind == ScenarioKind::Example52 ? 7 : spec.d;
  t.coefficients.resize(static_cast<std::size_t>(d));
  auto& c = t.coefficients;
  switch (spec.kind) {
    case ScenarioKind::Example51:
      c[0] = varying([](double u) { return -u; });
      c[1] = varying([](double u) { return std::sin(2.0 * kPi * u); });
      c[2] = varying([](double u) { return 4.0 * (u - 0.5) * (u - 0.5); });
      c[3] = constant(0.6);
      c[4] = constant(-0.7);
      break;
    case ScenarioKind::Example52:
      switch (spec.model) {
        case VcModel::I:
          c[0] = varying([](double u) { return 2.0 * std::sin(2.0 * kPi * u); });
          c[1] = varying([](double u) { return 4.0 * u * (1.0 - u); });
          break;
        case VcModel::II:
          c[0] = varying([](double u) { return std::exp(2.0 * u - 1.0); });
          c[1] = varying([](double u) { return 8.0 * u * (1.0 - u); });
          c[2] = varying([](double u) {
            const double cs = std::cos(2.0 * kPi * u);
            return 2.0 * cs * cs;
          });
          break;
        case VcModel::III:
          c[0] = varying([](double u) { return 4.0 * u; });
          c[1] = varying([](double u) { return 2.0 * std::sin(2.0 * kPi * u); });
          c[2] = constant(1.0);
          break;
      }
      break;
    case ScenarioKind::Example53:
      c[0] = varying([](double u) { return -4.0 * (u * u * u + 2.0 * u * u - 2.0 * u); });
      c[1] = varying([](double u) { return 4.0 * std::cos(2.0 * kPi * u); });
      c[2] = varying([](double u) { return 3.0 * std::exp(u - 0.5); });
      break;
  }
  return t;
}

std::uint64_t mix_seed(std::uint64_t value) noexcept {
  std::uint64_t z = value + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Simulated generate(const ScenarioSpec& spec) {
  Truth truth = scenario_truth(spec);
  const Index n = spec.n;
  const Index d = truth.d();
  std::mt19937_64 rng(spec.seed);
  Vector u(n);
  Matrix x(n, d);
  Vector y(n);
  std::normal_distribution<double> z(0.0, 1.0);
  for (Index i = 0; i < n; ++i) {
    switch (spec.kind) {
      case ScenarioKind::Example51:
        for (Index j = 0; j < d; ++j) x(i, j) = z(rng);
        u[i] = draw_u(rng, IndexDistribution::Uniform);
        break;
      case ScenarioKind::Example52: {
        x(i, 0) = 1.0;
        Eigen::RowVectorXd row(d - 1);
        ar_normal(rng, 0.5, row);
        x.row(i).tail(d - 1) = row;
        u[i] = draw_u(rng, spec.u_dist);
        break;
      }
      case ScenarioKind::Example53: {
        x(i, 0) = 1.0;
        Eigen::RowVectorXd row(d - 1);
        ar_normal(rng, 0.1, row);
        x.row(i).tail(d - 1) = row;
        u[i] = draw_u(rng, IndexDistribution::Uniform);
        break;
      }
    }
    const double eta = x.row(i).dot(truth.at(u[i]));
    switch (spec.kind) {
      case ScenarioKind::Example51: {
        std::poisson_distribution<long> pois(std::exp(std::clamp(eta, -kPredictorBound, kPredictorBound)));
        y[i] = static_cast<double>(pois(rng));
        break;
      }
      case ScenarioKind::Example52:
        y[i] = eta + spec.sigma * z(rng);
        break;
      case ScenarioKind::Example53: {
        std::bernoulli_distribution bern(1.0 / (1.0 + std::exp(-eta)));
        y[i] = bern(rng) ? 1.0 : 0.0;
        break;
      }
    }
  }
  return {Dataset(std::move(u), std::move(x), std::move(y)), std::move(truth)};
}

// ---- oracle ----

namespace {

struct Restriction {
  std::vector<bool> fixed;  // length 2d over (a, h b)
  Vector values;            // values of the fixed coordinates
};

Restriction restriction(const std::vector<VerdictKind>& structure, const Vector& constants, bool pin_constants) {
  const Index d = static_cast<Index>(structure.size());
  Restriction r;
  r.fixed.assign(static_cast<std::size_t>(2 * d), false);
  r.values = Vector::Zero(2 * d);
  for (Index j = 0; j < d; ++j) {
    switch (structure[static_cast<std::size_t>(j)]) {
      case VerdictKind::Zero:
        r.fixed[static_cast<std::size_t>(j)] = true;
        r.fixed[static_cast<std::size_t>(d + j)] = true;
        break;
      case VerdictKind::Constant:
        r.fixed[static_cast<std::size_t>(d + j)] = true;
        if (pin_constants) {
          r.fixed[static_cast<std::size_t>(j)] = true;
          r.values[j] = constants[j];
        }
        break;
      case VerdictKind::Varying:
        break;
    }
  }
  return r;
}

bool has_constants(const std::vector<VerdictKind>& structure) {
  return std::any_of(structure.begin(), structure.end(), [](VerdictKind k) { return k == VerdictKind::Constant; });
}

// Maximiser of the point-k quadratic on the free coordinates.
Vector surrogate_point(const QuadraticSurrogate& s, Index k, const Restriction& r) {
  const Index p = 2 * s.d;
  std::vector<Index> free;
  for (Index c = 0; c < p; ++c)
    if (!r.fixed[static_cast<std::size_t>(c)]) free.push_back(c);
  Vector v = r.values;
  if (free.empty()) return v;
  const Matrix& m = s.curvature[static_cast<std::size_t>(k)];
  const Vector vt = s.expansion.row(k).transpose();
  // M_FF v_F = L'_F + (M v~)_F - M_FP v_P
  const Vector rhs_full = s.score.col(k) + m * vt - m * v;  // v has zeros on free coordinates
  const Index f = static_cast<Index>(free.size());
  Matrix mff(f, f);
  Vector rhs(f);
  for (Index a = 0; a < f; ++a) {
    rhs[a] = rhs_full[free[a]];
    for (Index b = 0; b < f; ++b) mff(a, b) = m(free[a], free[b]);
  }
  Eigen::LLT<Matrix> llt(mff);
  if (llt.info() != Eigen::Success)
    fail(ErrorKind::Numeric, "restricted oracle system is singular at fitting point " + std::to_string(k + 1));
  const Vector sol = llt.solve(rhs);
  for (Index a = 0; a < f; ++a) v[free[a]] = sol[a];
  return v;
}

OracleFit assemble(const std::vector<Vector>& points, Index d, double h, const std::vector<VerdictKind>& structure,
                   const Vector& constants) {
  const Index n = static_cast<Index>(points.size());
  OracleFit out;
  out.field = CoefficientField{Matrix(n, d), Matrix(n, d), h};
  for (Index k = 0; k < n; ++k) {
    out.field.alpha.row(k) = points[static_cast<std::size_t>(k)].head(d).transpose();
    out.field.beta.row(k) = (points[static_cast<std::size_t>(k)].tail(d) / h).transpose();
  }
  out.constants = Vector::Zero(d);
  for (Index j = 0; j < d; ++j)
    if (structure[static_cast<std::size_t>(j)] == VerdictKind::Constant) out.constants[j] = constants[j];
  return out;
}

Vector column_means(const std::vector<Vector>& points, Index d) {
  Vector c = Vector::Zero(d);
  for (const auto& v : points) c += v.head(d);
  return c / static_cast<double>(points.size());
}

}  // namespace

OracleFit oracle_fit(const QuadraticSurrogate& s, const std::vector<VerdictKind>& structure) {
  if (static_cast<Index>(structure.size()) != s.d) fail(ErrorKind::InvalidArgument, "structure has wrong length");
  std::vector<Vector> points(static_cast<std::size_t>(s.n));
  Vector constants = Vector::Zero(s.d);
  Restriction r = restriction(structure, constants, false);
  for (Index k = 0; k < s.n; ++k) points[static_cast<std::size_t>(k)] = surrogate_point(s, k, r);
  if (has_constants(structure)) {
    constants = column_means(points, s.d);
    r = restriction(structure, constants, true);
    for (Index k = 0; k < s.n; ++k) points[static_cast<std::size_t>(k)] = surrogate_point(s, k, r);
  }
  return assemble(points, s.d, s.h, structure, constants);
}

Vector restricted_local_fit(const Dataset& data, const Family& family, const Kernel& kernel, double center,
                            const std::vector<VerdictKind>& structure, const Vector& constants) {
  if (static_cast<Index>(structure.size()) != data.d()) fail(ErrorKind::InvalidArgument, "structure has wrong length");
  const Restriction r = restriction(structure, constants, true);
  const auto design = LocalDesign::at(data, kernel, center);
  if (design.size() == 0) fail(ErrorKind::Numeric, "no observations within the kernel window at " + std::to_string(center));
  return fit_local(data, family, design, 0.0, 0.0, r.values, r.fixed).v;
}

OracleFit oracle_fit_exact(const Dataset& data, const Family& family, const Kernel& kernel,
                           const std::vector<VerdictKind>& structure) {
  const Index n = data.n();
  const Index d = data.d();
  if (static_cast<Index>(structure.size()) != d) fail(ErrorKind::InvalidArgument, "structure has wrong length");
  std::vector<Vector> points(static_cast<std::size_t>(n));
  Vector constants = Vector::Zero(d);
  auto pass = [&](bool pin) {
    const Restriction r = restriction(structure, constants, pin);
    for (Index k = 0; k < n; ++k) {
      const auto design = LocalDesign::at_point(data, kernel, k);
      points[static_cast<std::size_t>(k)] = fit_local(data, family, design, 0.0, 0.0, r.values, r.fixed).v;
    }
  };
  pass(false);
  if (has_constants(structure)) {
    constants = column_means(points, d);
    pass(true);
  }
  return assemble(points, d, kernel.bandwidth(), structure, constants);
}

// ---- metrics ----

std::string_view category_name(SelectionCategory c) noexcept {
  switch (c) {
    case SelectionCategory::Correct: return "correct";
    case SelectionCategory::UnderSelected: return "under_selected";
    case SelectionCategory::UnderSpecified: return "under_specified";
    case SelectionCategory::OverSelected: return "over_selected";
    case SelectionCategory::OverSpecified: return "over_specified";
    case SelectionCategory::Others: return "others";
  }
  return "others";
}

SelectionCategory tally(const std::vector<VerdictKind>& reported, const std::vector<VerdictKind>& truth) {
  if (reported.size() != truth.size()) fail(ErrorKind::InvalidArgument, "structures have different lengths");
  bool under_sel = false, under_spec = false, over_sel = false, over_spec = false;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    const VerdictKind t = truth[j];
    const VerdictKind r = reported[j];
    if (t != VerdictKind::Zero && r == VerdictKind::Zero) under_sel = true;
    if (t == VerdictKind::Varying && r == VerdictKind::Constant) under_spec = true;
    if (t == VerdictKind::Zero && r != VerdictKind::Zero) over_sel = true;
    if (t == VerdictKind::Constant && r == VerdictKind::Varying) over_spec = true;
  }
  const int kinds = int(under_sel) + int(under_spec) + int(over_sel) + int(over_spec);
  if (kinds == 0) return SelectionCategory::Correct;
  if (kinds > 1) return SelectionCategory::Others;
  if (under_sel) return SelectionCategory::UnderSelected;
  if (under_spec) return SelectionCategory::UnderSpecified;
  if (over_sel) return SelectionCategory::OverSelected;
  return SelectionCategory::OverSpecified;
}

SelectionCategory tally(const StructureReport& report, const Truth& truth) {
  std::vector<VerdictKind> reported;
  for (const auto& v : report.verdicts) reported.push_back(v.kind);
  return tally(reported, truth.structure());
}

double mise(const Vector& curve_est, const std::function<double(double)>& truth_fn, const Vector& u) {
  if (curve_est.size() != u.size() || u.size() == 0) fail(ErrorKind::InvalidArgument, "mise inputs are misaligned");
  double total = 0.0;
  for (Index k = 0; k < u.size(); ++k) {
    const double e = curve_est[k] - truth_fn(u[k]);
    total += e * e;
  }
  return total / static_cast<double>(u.size());
}

double mse(double c_est, double c_true) { return (c_est - c_true) * (c_est - c_true); }

double ree(const Matrix& est, const Matrix& oracle, const Matrix& truth) {
  if (est.rows() != truth.rows() || est.cols() != truth.cols() || oracle.rows() != truth.rows() ||
      oracle.cols() != truth.cols())
    fail(ErrorKind::InvalidArgument, "ree inputs are misaligned");
  const double denom = (oracle - truth).cwiseAbs().sum();
  if (!(denom > 0.0)) fail(ErrorKind::UndefinedMetric, "REE is undefined: the oracle estimate is exact");
  return 100.0 * (est - truth).cwiseAbs().sum() / denom;
}

double mrpe(const Vector& predictions, const Vector& actuals) {
  if (predictions.size() != actuals.size() || actuals.size() == 0)
    fail(ErrorKind::InvalidArgument, "mrpe inputs are misaligned");
  double total = 0.0;
  for (Index i = 0; i < actuals.size(); ++i) {
    if (actuals[i] == 0.0)
      fail(ErrorKind::UndefinedMetric, "MRPE is undefined: actual value at index " + std::to_string(i + 1) + " is zero");
    total += std::abs(predictions[i] - actuals[i]) / std::abs(actuals[i]);
  }
  return 100.0 * total / static_cast<double>(actuals.size());
}

Matrix report_coefficients(const StructureReport& report) {
  const Index n = report.knots.size();
  Matrix a(n, report.d());
  for (Index j = 0; j < report.d(); ++j)
    for (Index k = 0; k < n; ++k) a(k, j) = report.coefficient_at_knot(j, k);
  return a;
}

// ---- harness ----

namespace {

std::vector<Index> indices_of(const Truth& truth, VerdictKind kind) {
  std::vector<Index> out;
  for (Index j = 0; j < truth.d(); ++j)
    if (truth.coefficients[static_cast<std::size_t>(j)].kind == kind) out.push_back(j);
  return out;
}

PenaltySpec make_penalty(PenaltyKind kind, int kappa, double a0) {
  return kind == PenaltyKind::AdaptiveGroupLasso ? PenaltySpec::adaptive_group_lasso(0.0, 0.0, kappa)
                                                 : PenaltySpec::group_scad(0.0, 0.0, a0);
}

}  // namespace

ReplicationOutcome run_replication(const HarnessOptions& options, Index rep) {
  const auto start = std::chrono::steady_clock::now();
  ScenarioSpec spec = options.scenario;
  spec.seed = mix_seed(options.scenario.seed + static_cast<std::uint64_t>(rep));
  const Simulated sim = generate(spec);
  const Dataset& data = sim.data;
  const Family family(spec.family());
  const auto varying_idx = indices_of(sim.truth, VerdictKind::Varying);
  const auto constant_idx = indices_of(sim.truth, VerdictKind::Constant);

  PipelineOptions po = options.pipeline;
  po.family = spec.family();
  const PreparedFit prepared = prepare_fit(data, po);

  ReplicationOutcome out;
  out.rep = rep;
  out.seed = spec.seed;
  const Matrix truth_values = sim.truth.at_knots(data.u());
  out.true_constants.resize(static_cast<Index>(constant_idx.size()));
  for (std::size_t c = 0; c < constant_idx.size(); ++c)
    out.true_constants[static_cast<Index>(c)] = sim.truth.coefficients[static_cast<std::size_t>(constant_idx[c])].value;

  const auto structure = sim.truth.structure();
  const OracleFit oracle = options.oracle == OracleMode::Exact
                               ? oracle_fit_exact(data, family, Kernel(prepared.h), structure)
                               : oracle_fit(prepared.surrogate, structure);
  Matrix oracle_values = oracle.field.alpha;
  for (Index j = 0; j < data.d(); ++j)
    if (structure[static_cast<std::size_t>(j)] == VerdictKind::Constant)
      oracle_values.col(j).setConstant(oracle.constants[j]);
  out.oracle_mise.resize(static_cast<Index>(varying_idx.size()));
  for (std::size_t v = 0; v < varying_idx.size(); ++v) {
    const Index j = varying_idx[v];
    out.oracle_mise[static_cast<Index>(v)] =
        mise(oracle_values.col(j), sim.truth.coefficients[static_cast<std::size_t>(j)].curve, data.u());
  }
  out.oracle_constants.resize(static_cast<Index>(constant_idx.size()));
  out.oracle_se.resize(static_cast<Index>(constant_idx.size()));
  for (std::size_t c = 0; c < constant_idx.size(); ++c) {
    out.oracle_constants[static_cast<Index>(c)] = oracle.constants[constant_idx[c]];
    out.oracle_se[static_cast<Index>(c)] =
        mse(oracle.constants[constant_idx[c]], out.true_constants[static_cast<Index>(c)]);
  }

  for (PenaltyKind kind : options.penalties) {
    const PenaltySpec penalty = make_penalty(kind, options.kappa, options.a0);
    const TuningResult tuning = select_structure(data, prepared, penalty, po);
    const StructureReport& report = tuning.report;
    PenaltyOutcome po_out;
    po_out.penalty = kind;
    po_out.category = tally(report, sim.truth);
    for (const auto& v : report.verdicts) po_out.structure.push_back(v.kind);
    const Matrix est = report_coefficients(report);
    po_out.curve_mise.resize(static_cast<Index>(varying_idx.size()));
    for (std::size_t v = 0; v < varying_idx.size(); ++v) {
      const Index j = varying_idx[v];
      po_out.curve_mise[static_cast<Index>(v)] =
          mise(est.col(j), sim.truth.coefficients[static_cast<std::size_t>(j)].curve, data.u());
    }
    po_out.constants.resize(static_cast<Index>(constant_idx.size()));
    po_out.constant_se.resize(static_cast<Index>(constant_idx.size()));
    for (std::size_t c = 0; c < constant_idx.size(); ++c) {
      const double value = est.col(constant_idx[c]).mean();
      po_out.constants[static_cast<Index>(c)] = value;
      po_out.constant_se[static_cast<Index>(c)] = mse(value, out.true_constants[static_cast<Index>(c)]);
    }
    po_out.ree = ree(est, oracle_values, truth_values);
    const GicCell& cell = tuning.table.cells[tuning.table.argmin];
    po_out.lambda = cell.lambda;
    po_out.lambda_star = cell.lambda_star;
    out.fits.push_back(std::move(po_out));
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

HarnessResult run_harness(const HarnessOptions& options) {
  if (options.reps < 1) fail(ErrorKind::InvalidArgument, "reps must be at least 1");
  if (options.penalties.empty()) fail(ErrorKind::InvalidArgument, "no penalties requested");
  HarnessResult result;
  result.options = options;
  const Truth truth = scenario_truth(options.scenario);
  result.varying = indices_of(truth, VerdictKind::Varying);
  result.constant = indices_of(truth, VerdictKind::Constant);
  result.reps.resize(static_cast<std::size_t>(options.reps));
  HarnessOptions inner = options;
  inner.pipeline.threads = 1;
  parallel_for(static_cast<std::size_t>(options.reps), options.threads,
               [&](std::size_t r) { result.reps[r] = run_replication(inner, static_cast<Index>(r)); });
  return result;
}

namespace {

const PenaltyOutcome* find_fit(const ReplicationOutcome& r, PenaltyKind p) {
  for (const auto& f : r.fits)
    if (f.penalty == p) return &f;
  return nullptr;
}

}  // namespace

SelectionTally HarnessResult::tally_for(PenaltyKind p) const {
  SelectionTally t;
  for (const auto& r : reps)
    if (const auto* f = find_fit(r, p)) t.add(f->category);
  return t;
}

double HarnessResult::mean_curve_mise(PenaltyKind p, std::size_t which) const {
  double total = 0.0;
  Index count = 0;
  for (const auto& r : reps)
    if (const auto* f = find_fit(r, p)) {
      total += f->curve_mise[static_cast<Index>(which)];
      ++count;
    }
  return count == 0 ? std::numeric_limits<double>::quiet_NaN() : total / static_cast<double>(count);
}

double HarnessResult::mean_constant_mse(PenaltyKind p, std::size_t which) const {
  double total = 0.0;
  Index count = 0;
  for (const auto& r : reps)
    if (const auto* f = find_fit(r, p)) {
      total += f->constant_se[static_cast<Index>(which)];
      ++count;
    }
  return count == 0 ? std::numeric_limits<double>::quiet_NaN() : total / static_cast<double>(count);
}

double HarnessResult::mean_oracle_mise(std::size_t which) const {
  double total = 0.0;
  for (const auto& r : reps) total += r.oracle_mise[static_cast<Index>(which)];
  return total / static_cast<double>(reps.size());
}

double HarnessResult::mean_oracle_mse(std::size_t which) const {
  double total = 0.0;
  for (const auto& r : reps) total += r.oracle_se[static_cast<Index>(which)];
  return total / static_cast<double>(reps.size());
}

double HarnessResult::median_ree(PenaltyKind p) const {
  std::vector<double> values;
  for (const auto& r : reps)
    if (const auto* f = find_fit(r, p)) values.push_back(f->ree);
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  return m % 2 == 1 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
}

void write_tables(const HarnessResult& result, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create output directory '" + dir + "': " + ec.message());
  auto open = [&](const std::string& name) {
    std::ofstream f(fs::path(dir) / name);
    if (!f) fail(ErrorKind::Io, "cannot write " + (fs::path(dir) / name).string());
    f << std::setprecision(10);
    return f;
  };
  const std::string scenario = result.options.scenario.name();
  const Index d = scenario_truth(result.options.scenario).d();

  {
    auto f = open("table1.csv");
    f << "scenario,penalty,d,reps";
    for (int c = 0; c < kCategoryCount; ++c) f << ',' << category_name(static_cast<SelectionCategory>(c));
    f << '\n';
    for (PenaltyKind p : result.options.penalties) {
      const auto t = result.tally_for(p);
      f << scenario << ',' << PenaltySpec{p}.name() << ',' << d << ',' << t.total;
      for (int c = 0; c < kCategoryCount; ++c) f << ',' << t.rate(static_cast<SelectionCategory>(c));
      f << '\n';
    }
  }
  {
    auto f = open("table2.csv");
    f << "scenario,estimator,coefficient,metric,value\n";
    for (PenaltyKind p : result.options.penalties) {
      for (std::size_t v = 0; v < result.varying.size(); ++v)
        f << scenario << ',' << PenaltySpec{p}.name() << ",a" << result.varying[v] + 1 << ",mise,"
          << result.mean_curve_mise(p, v) << '\n';
      for (std::size_t c = 0; c < result.constant.size(); ++c)
        f << scenario << ',' << PenaltySpec{p}.name() << ",c" << c + 1 << ",mse," << result.mean_constant_mse(p, c)
          << '\n';
    }
    for (std::size_t v = 0; v < result.varying.size(); ++v)
      f << scenario << ",oracle,a" << result.varying[v] + 1 << ",mise," << result.mean_oracle_mise(v) << '\n';
    for (std::size_t c = 0; c < result.constant.size(); ++c)
      f << scenario << ",oracle,c" << c + 1 << ",mse," << result.mean_oracle_mse(c) << '\n';
  }
  {
    auto f = open("ree.csv");
    f << "scenario,penalty,rep,ree\n";
    for (PenaltyKind p : result.options.penalties) {
      for (const auto& r : result.reps)
        if (const auto* fit = find_fit(r, p)) f << scenario << ',' << PenaltySpec{p}.name() << ',' << r.rep + 1 << ',' << fit->ree << '\n';
      f << scenario << ',' << PenaltySpec{p}.name() << ",median," << result.median_ree(p) << '\n';
    }
  }
}

// ---- rolling prediction ----

Simulated generate_rolling_series(const RollingSpec& spec) {
  if (spec.total < 10 || spec.train < 5 || spec.train >= spec.total)
    fail(ErrorKind::InvalidArgument, "rolling series needs 5 <= train < total and total >= 10");
  Truth truth;
  truth.coefficients.resize(10);
  truth.coefficients[0] = varying([](double u) { return 4.0 + 0.3 * std::sin(2.0 * kPi * u); });
  truth.coefficients[1] = varying([](double u) { return 0.25 * std::cos(2.0 * kPi * u); });
  truth.coefficients[2] = varying([](double u) { return 0.3 * (2.0 * u - 1.0); });
  truth.coefficients[3] = constant(0.15);
  const Index n = spec.total;
  const Index d = truth.d();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Vector u(n);
  Matrix x(n, d);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    u[i] = static_cast<double>(i + 1) / static_cast<double>(n);
    x(i, 0) = 1.0;
    for (Index j = 1; j < d; ++j) x(i, j) = z(rng);
    const double eta = x.row(i).dot(truth.at(u[i]));
    std::poisson_distribution<long> pois(std::exp(std::clamp(eta, -kPredictorBound, kPredictorBound)));
    y[i] = static_cast<double>(pois(rng));
  }
  return {Dataset(std::move(u), std::move(x), std::move(y)), std::move(truth)};
}

RollingOutcome rolling_prediction(const Dataset& series, Index train, const PipelineOptions& options) {
  const Index total = series.n();
  if (train < 3 || train >= total) fail(ErrorKind::InvalidArgument, "train size must be in [3, rows - 1]");
  const Family family(options.family);
  const Dataset head = series.first_rows(train);
  const PipelineResult fit = fit_pipeline(head, options);
  RollingOutcome out;
  out.report = fit.tuning.report;
  const Index d = series.d();
  std::vector<VerdictKind> selected;
  Vector constants = Vector::Zero(d);
  for (Index j = 0; j < d; ++j) {
    const auto& v = out.report.verdicts[static_cast<std::size_t>(j)];
    selected.push_back(v.kind);
    if (v.kind == VerdictKind::Constant) constants[j] = v.value;
  }
  const std::vector<VerdictKind> full(static_cast<std::size_t>(d), VerdictKind::Varying);
  const Kernel kernel(fit.prepared.h);
  const Index m = total - train;
  out.actual.resize(m);
  out.selected.resize(m);
  out.full.resize(m);
  for (Index t = 0; t < m; ++t) {
    const Index row = train + t;
    const Dataset past = series.first_rows(row);
    const double u0 = series.u()[row];
    const Vector x0 = series.x().row(row).transpose();
    const Vector vs = restricted_local_fit(past, family, kernel, u0, selected, constants);
    const Vector vf = restricted_local_fit(past, family, kernel, u0, full, Vector::Zero(d));
    out.selected[t] = family.inverse_link(vs.head(d).dot(x0));
    out.full[t] = family.inverse_link(vf.head(d).dot(x0));
    out.actual[t] = series.y()[row];
  }
  out.mrpe_selected = mrpe(out.selected, out.actual);
  out.mrpe_full = mrpe(out.full, out.actual);
  return out;
}

}  // namespace gsvcm
