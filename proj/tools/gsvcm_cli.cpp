// gsvcm command-line front end. Talks to the library only through gsvcm.h.

#include "gsvcm/gsvcm.h"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

struct Failure {
  int code;
};

int exit_code(gsvcm_status s) {
  switch (s) {
    case GSVCM_OK: return kExitOk;
    case GSVCM_ERR_INVALID_ARGUMENT:
    case GSVCM_ERR_INPUT:
    case GSVCM_ERR_IO: return kExitInput;
    default: return kExitNumeric;
  }
}

void check(gsvcm_status s) {
  if (s == GSVCM_OK) return;
  std::fprintf(stderr, "gsvcm: %s: %s\n", gsvcm_status_name(s), gsvcm_last_error());
  throw Failure{exit_code(s)};
}

[[noreturn]] void usage_error(const std::string& what) {
  std::fprintf(stderr, "gsvcm: %s\n", what.c_str());
  throw Failure{kExitInput};
}

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      usage_error(std::string(flag) + ": '" + item + "' is not a number");
    }
  }
  return out;
}

// Handle owners for the C objects.
template <class T, void (*Free)(T*)>
struct Owned {
  T* p = nullptr;
  Owned() = default;
  Owned(const Owned&) = delete;
  Owned& operator=(const Owned&) = delete;
  ~Owned() { Free(p); }
};

using Dataset = Owned<gsvcm_dataset, gsvcm_dataset_free>;
using Options = Owned<gsvcm_options, gsvcm_options_free>;
using Fit = Owned<gsvcm_fit, gsvcm_fit_free>;
using Report = Owned<gsvcm_report, gsvcm_report_free>;

struct ModelFlags {
  std::string family = "poisson";
  std::string penalty = "scad";
  int kappa = 1;
  double a0 = 3.7;
  std::optional<double> bandwidth;
  std::string lambda_grid;
  std::string lambda_star_grid;
  std::string grid_scale = "relative";
};

void add_model_flags(CLI::App* app, ModelFlags& m, bool with_family = true) {
  if (with_family)
    app->add_option("--family", m.family, "poisson | logistic | gaussian")
        ->check(CLI::IsMember({"poisson", "logistic", "gaussian"}))
        ->capture_default_str();
  app->add_option("--penalty", m.penalty, "scad | aglasso")->check(CLI::IsMember({"scad", "aglasso"}))->capture_default_str();
  app->add_option("--kappa", m.kappa, "adaptive lasso exponent (1 or 2)")->check(CLI::IsMember({1, 2}))->capture_default_str();
  app->add_option("--a0", m.a0, "SCAD shape constant")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--bandwidth", m.bandwidth, "kernel bandwidth (default 0.75 (log d / n)^0.2)")->check(CLI::PositiveNumber);
  app->add_option("--lambda-grid", m.lambda_grid, "comma-separated lambda values");
  app->add_option("--lambda-star-grid", m.lambda_star_grid, "comma-separated lambda* values (default: tied to lambda)");
  app->add_option("--grid-scale", m.grid_scale, "default grid: relative | rate")
      ->check(CLI::IsMember({"relative", "rate"}))
      ->capture_default_str();
}

void apply(const ModelFlags& m, gsvcm_options* o, unsigned threads, bool with_family = true) {
  if (with_family) check(gsvcm_options_set_family(o, m.family.c_str()));
  check(gsvcm_options_set_penalty(o, m.penalty.c_str()));
  check(gsvcm_options_set_kappa(o, m.kappa));
  check(gsvcm_options_set_a0(o, m.a0));
  if (m.bandwidth) check(gsvcm_options_set_bandwidth(o, *m.bandwidth));
  check(gsvcm_options_set_grid_scale(o, m.grid_scale.c_str()));
  const auto lambdas = parse_list(m.lambda_grid, "--lambda-grid");
  const auto stars = parse_list(m.lambda_star_grid, "--lambda-star-grid");
  if (!stars.empty() && lambdas.empty()) usage_error("--lambda-star-grid needs --lambda-grid");
  if (!lambdas.empty())
    check(gsvcm_options_set_lambda_grid(o, lambdas.data(), lambdas.size(), stars.empty() ? nullptr : stars.data(),
                                        stars.size()));
  check(gsvcm_options_set_threads(o, threads));
}

unsigned resolve_threads(unsigned flag) {
  if (const char* env = std::getenv("GSVCM_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (*end != '\0' || v == 0) usage_error(std::string("GSVCM_THREADS='") + env + "' is not a positive integer");
    return static_cast<unsigned>(v);
  }
  if (flag > 0) return flag;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure selection for generalized semi-varying coefficient models"};
  app.set_version_flag("--version", gsvcm_version());
  app.require_subcommand(1);

  unsigned threads = 0;
  std::string output_dir = ".";
  std::uint64_t seed = 1;

  // fit
  auto* fit = app.add_subcommand("fit", "select the structure of a dataset (CSV header u, y, x1..xd)");
  std::string fit_input;
  int curve_grid = 0;
  ModelFlags fit_model;
  fit->add_option("--input,input", fit_input, "data CSV")->required();
  add_model_flags(fit, fit_model);
  fit->add_option("--grid", curve_grid, "evaluate curves on this many evenly spaced points")->check(CLI::NonNegativeNumber);

  // simulate
  auto* sim = app.add_subcommand("simulate", "run a simulated example and write the summary tables");
  std::string scenario = "ex51";
  std::size_t reps = 100;
  std::size_t sim_n = 0;
  std::size_t sim_d = 0;
  std::string u_dist = "uniform";
  std::string sim_penalties = "scad,aglasso";
  std::string dump_data;
  ModelFlags sim_model;
  sim->add_option("--scenario", scenario, "ex51 | ex52-I | ex52-II | ex52-III | ex53")->capture_default_str();
  sim->add_option("--reps", reps, "replications")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--n", sim_n, "sample size (default: scenario value)");
  sim->add_option("--dn", sim_d, "number of covariates (default: scenario value)");
  sim->add_option("--u-dist", u_dist, "uniform | beta41")->check(CLI::IsMember({"uniform", "beta41"}))->capture_default_str();
  sim->add_option("--penalties", sim_penalties, "comma list of scad, aglasso")->capture_default_str();
  sim->add_option("--dump-data", dump_data, "write one dataset drawn with --seed to this CSV and stop");
  add_model_flags(sim, sim_model, false);

  // predict
  auto* pred = app.add_subcommand("predict", "predict from a report, or run rolling one-step prediction");
  std::string report_path;
  std::string pred_input;
  std::size_t train_size = 0;
  std::size_t synthetic = 0;
  ModelFlags pred_model;
  pred->add_option("--report", report_path, "report.json from fit");
  pred->add_option("--input,input", pred_input, "rows to predict (u, x1..xd), or the full series in rolling mode");
  pred->add_option("--train-size", train_size, "rolling mode: rows used for selection")->check(CLI::PositiveNumber);
  pred->add_option("--synthetic", synthetic, "rolling mode: generate a synthetic Poisson series of this length");
  add_model_flags(pred, pred_model);

  for (auto* sub : {fit, sim, pred}) {
    sub->add_option("--seed", seed, "random seed")->capture_default_str();
    sub->add_option("--threads", threads, "worker threads (default: all cores; GSVCM_THREADS overrides)");
    sub->add_option("--output-dir,-o", output_dir, "output directory")->capture_default_str();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    const unsigned nthreads = resolve_threads(threads);
    const std::string out = output_dir;

    if (*fit) {
      Dataset data;
      check(gsvcm_dataset_read_csv(fit_input.c_str(), &data.p));
      Options opts;
      check(gsvcm_options_create(&opts.p));
      apply(fit_model, opts.p, nthreads);
      Fit result;
      check(gsvcm_fit_run(data.p, opts.p, &result.p));
      check(gsvcm_fit_write(result.p, out.c_str(), curve_grid));
      Report report;
      check(gsvcm_fit_report(result.p, &report.p));
      double lambda = 0.0, lambda_star = 0.0;
      check(gsvcm_fit_selected_lambda(result.p, &lambda, &lambda_star));
      std::printf("n=%zu d=%zu h=%.6g lambda=%.6g lambda*=%.6g\n", gsvcm_dataset_n(data.p), gsvcm_dataset_d(data.p),
                  gsvcm_fit_bandwidth(result.p), lambda, lambda_star);
      for (std::size_t j = 0; j < gsvcm_report_d(report.p); ++j) {
        gsvcm_verdict kind = GSVCM_ZERO;
        double value = 0.0;
        check(gsvcm_report_verdict(report.p, j, &kind, &value));
        if (kind == GSVCM_CONSTANT) std::printf("x%zu constant %.6g\n", j + 1, value);
        if (kind == GSVCM_VARYING) std::printf("x%zu varying\n", j + 1);
      }
      std::printf("wrote report.json gic_table.csv curves.csv to %s\n", out.c_str());
      return kExitOk;
    }

    if (*sim) {
      if (!dump_data.empty()) {
        Dataset data;
        check(gsvcm_simulate_dataset(scenario.c_str(), sim_n, sim_d, u_dist.c_str(), seed, &data.p));
        check(gsvcm_dataset_write_csv(data.p, dump_data.c_str()));
        std::printf("wrote %s\n", dump_data.c_str());
        return kExitOk;
      }
      Options opts;
      check(gsvcm_options_create(&opts.p));
      apply(sim_model, opts.p, 1, false);
      gsvcm_simulation_config c{};
      c.scenario = scenario.c_str();
      c.reps = reps;
      c.seed = seed;
      c.n = sim_n;
      c.d = sim_d;
      c.u_dist = u_dist.c_str();
      c.penalties = sim_penalties.c_str();
      c.kappa = sim_model.kappa;
      c.a0 = sim_model.a0;
      c.threads = nthreads;
      check(gsvcm_simulate_run(&c, opts.p, out.c_str()));
      std::printf("wrote table1.csv table2.csv ree.csv to %s\n", out.c_str());
      return kExitOk;
    }

    if (*pred) {
      const bool rolling = train_size > 0 || synthetic > 0;
      if (rolling) {
        Dataset series;
        if (synthetic > 0) {
          check(gsvcm_rolling_series(synthetic, seed, &series.p));
        } else {
          if (pred_input.empty()) usage_error("rolling mode needs --input or --synthetic");
          check(gsvcm_dataset_read_csv(pred_input.c_str(), &series.p));
        }
        const std::size_t rows = gsvcm_dataset_n(series.p);
        const std::size_t train = train_size > 0 ? train_size : rows - 1;
        if (train >= rows) usage_error("--train-size must be smaller than the series length");
        Options opts;
        check(gsvcm_options_create(&opts.p));
        ModelFlags m = pred_model;
        if (!report_path.empty()) {
          // family and penalty follow the report when one is given
          Report r;
          check(gsvcm_report_read(report_path.c_str(), &r.p));
          m.family = gsvcm_report_family(r.p);
        }
        apply(m, opts.p, nthreads);
        double selected = 0.0, full = 0.0;
        check(gsvcm_rolling_predict(series.p, train, opts.p, out.c_str(), &selected, &full));
        std::printf("predictions=%zu mrpe_selected=%.6g%% mrpe_full=%.6g%%\n", rows - train, selected, full);
        return kExitOk;
      }
      if (report_path.empty() || pred_input.empty()) usage_error("predict needs --report and --input");
      Report r;
      check(gsvcm_report_read(report_path.c_str(), &r.p));
      std::error_code ec;
      std::filesystem::create_directories(out, ec);
      if (ec) usage_error("cannot create output directory '" + out + "'");
      const std::string target = (std::filesystem::path(out) / "predictions.csv").string();
      check(gsvcm_report_predict_csv(r.p, pred_input.c_str(), target.c_str()));
      std::printf("wrote %s\n", target.c_str());
      return kExitOk;
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return kExitOk;
}
