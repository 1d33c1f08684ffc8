#include "gsvcm/gsvcm.h"

#include "gsvcm/io.hpp"
#include "gsvcm/pipeline.hpp"
#include "gsvcm/simulation.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

struct gsvcm_dataset {
  gsvcm::Dataset data;
};

struct gsvcm_options {
  gsvcm::PipelineOptions pipeline;
  std::vector<double> lambdas;
  std::vector<double> stars;
};

struct gsvcm_fit {
  gsvcm::PipelineResult result;
};

struct gsvcm_report {
  gsvcm::StructureReport report;
};

namespace {

thread_local std::string last_error;

gsvcm_status status_of(gsvcm::ErrorKind kind) {
  using gsvcm::ErrorKind;
  switch (kind) {
    case ErrorKind::InvalidArgument: return GSVCM_ERR_INVALID_ARGUMENT;
    case ErrorKind::Input: return GSVCM_ERR_INPUT;
    case ErrorKind::Numeric: return GSVCM_ERR_NUMERIC;
    case ErrorKind::OutOfDomain: return GSVCM_ERR_OUT_OF_DOMAIN;
    case ErrorKind::UndefinedMetric: return GSVCM_ERR_UNDEFINED_METRIC;
    case ErrorKind::TuningFailure: return GSVCM_ERR_TUNING;
    case ErrorKind::Io: return GSVCM_ERR_IO;
  }
  return GSVCM_ERR_INTERNAL;
}

template <class F>
gsvcm_status guard(F&& body) {
  try {
    body();
    last_error.clear();
    return GSVCM_OK;
  } catch (const gsvcm::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return GSVCM_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return GSVCM_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) gsvcm::fail(gsvcm::ErrorKind::InvalidArgument, std::string(what) + " is null");
}

std::filesystem::path prepare_dir(const char* dir) {
  require(dir, "output directory");
  std::filesystem::path p(dir);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) gsvcm::fail(gsvcm::ErrorKind::Io, "cannot create output directory '" + p.string() + "': " + ec.message());
  return p;
}

// Pipeline options with the explicit grid resolved.
gsvcm::PipelineOptions resolved(const gsvcm_options* options) {
  gsvcm::PipelineOptions p;
  if (options == nullptr) return p;
  p = options->pipeline;
  if (!options->lambdas.empty()) p.grid = gsvcm::make_grid(options->lambdas, options->stars);
  return p;
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* gsvcm_version(void) { return "1.0.0"; }

const char* gsvcm_last_error(void) { return last_error.c_str(); }

const char* gsvcm_status_name(gsvcm_status status) {
  switch (status) {
    case GSVCM_OK: return "ok";
    case GSVCM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case GSVCM_ERR_INPUT: return "input error";
    case GSVCM_ERR_NUMERIC: return "numeric error";
    case GSVCM_ERR_OUT_OF_DOMAIN: return "out of domain";
    case GSVCM_ERR_UNDEFINED_METRIC: return "undefined metric";
    case GSVCM_ERR_TUNING: return "tuning failure";
    case GSVCM_ERR_IO: return "i/o error";
    case GSVCM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void gsvcm_string_free(char* s) { std::free(s); }

gsvcm_status gsvcm_dataset_create(const double* u, const double* x, const double* y, size_t n, size_t d,
                                  gsvcm_dataset** out) {
  return guard([&] {
    require(u, "u");
    require(x, "x");
    require(y, "y");
    require(out, "out");
    const auto rows = static_cast<gsvcm::Index>(n);
    const auto cols = static_cast<gsvcm::Index>(d);
    gsvcm::Matrix xm = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(x, rows, cols);
    *out = new gsvcm_dataset{gsvcm::Dataset(Eigen::Map<const gsvcm::Vector>(u, rows), std::move(xm),
                                            Eigen::Map<const gsvcm::Vector>(y, rows))};
  });
}

gsvcm_status gsvcm_dataset_read_csv(const char* path, gsvcm_dataset** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new gsvcm_dataset{gsvcm::read_dataset_csv(path)};
  });
}

gsvcm_status gsvcm_dataset_write_csv(const gsvcm_dataset* data, const char* path) {
  return guard([&] {
    require(data, "dataset");
    require(path, "path");
    gsvcm::write_dataset_csv(std::string(path), data->data);
  });
}

size_t gsvcm_dataset_n(const gsvcm_dataset* data) { return data ? static_cast<size_t>(data->data.n()) : 0; }
size_t gsvcm_dataset_d(const gsvcm_dataset* data) { return data ? static_cast<size_t>(data->data.d()) : 0; }

gsvcm_status gsvcm_dataset_head(const gsvcm_dataset* data, size_t rows, gsvcm_dataset** out) {
  return guard([&] {
    require(data, "dataset");
    require(out, "out");
    *out = new gsvcm_dataset{data->data.first_rows(static_cast<gsvcm::Index>(rows))};
  });
}

void gsvcm_dataset_free(gsvcm_dataset* data) { delete data; }

gsvcm_status gsvcm_simulate_dataset(const char* scenario, size_t n, size_t d, const char* u_dist, uint64_t seed,
                                    gsvcm_dataset** out) {
  return guard([&] {
    require(scenario, "scenario");
    require(out, "out");
    gsvcm::ScenarioSpec spec = gsvcm::parse_scenario(scenario);
    if (n > 0) spec.n = static_cast<gsvcm::Index>(n);
    if (d > 0) spec.d = static_cast<gsvcm::Index>(d);
    if (u_dist != nullptr) {
      const std::string s(u_dist);
      if (s == "uniform") spec.u_dist = gsvcm::IndexDistribution::Uniform;
      else if (s == "beta41") spec.u_dist = gsvcm::IndexDistribution::Beta41;
      else gsvcm::fail(gsvcm::ErrorKind::InvalidArgument, "unknown index distribution '" + s + "'");
    }
    spec.seed = seed;
    *out = new gsvcm_dataset{gsvcm::generate(spec).data};
  });
}

gsvcm_status gsvcm_rolling_series(size_t total, uint64_t seed, gsvcm_dataset** out) {
  return guard([&] {
    require(out, "out");
    gsvcm::RollingSpec spec;
    spec.total = static_cast<gsvcm::Index>(total);
    spec.train = spec.total - 1;
    spec.seed = seed;
    *out = new gsvcm_dataset{gsvcm::generate_rolling_series(spec).data};
  });
}

gsvcm_status gsvcm_options_create(gsvcm_options** out) {
  return guard([&] {
    require(out, "out");
    *out = new gsvcm_options{};
  });
}

void gsvcm_options_free(gsvcm_options* options) { delete options; }

gsvcm_status gsvcm_options_set_family(gsvcm_options* options, const char* family) {
  return guard([&] {
    require(options, "options");
    require(family, "family");
    options->pipeline.family = gsvcm::parse_family(family);
  });
}

gsvcm_status gsvcm_options_set_penalty(gsvcm_options* options, const char* penalty) {
  return guard([&] {
    require(options, "options");
    require(penalty, "penalty");
    options->pipeline.penalty.kind = gsvcm::parse_penalty(penalty);
  });
}

gsvcm_status gsvcm_options_set_kappa(gsvcm_options* options, int kappa) {
  return guard([&] {
    require(options, "options");
    if (kappa != 1 && kappa != 2) gsvcm::fail(gsvcm::ErrorKind::InvalidArgument, "kappa must be 1 or 2");
    options->pipeline.penalty.kappa = kappa;
  });
}

gsvcm_status gsvcm_options_set_a0(gsvcm_options* options, double a0) {
  return guard([&] {
    require(options, "options");
    if (!(a0 > 2.0)) gsvcm::fail(gsvcm::ErrorKind::InvalidArgument, "a0 must exceed 2");
    options->pipeline.penalty.a0 = a0;
  });
}

gsvcm_status gsvcm_options_set_bandwidth(gsvcm_options* options, double h) {
  return guard([&] {
    require(options, "options");
    if (std::isnan(h)) gsvcm::fail(gsvcm::ErrorKind::InvalidArgument, "bandwidth is NaN");
    if (h > 0.0) options->pipeline.bandwidth = h;
    else options->pipeline.bandwidth.reset();
  });
}

gsvcm_status gsvcm_options_set_lambda_grid(gsvcm_options* options, const double* lambdas, size_t count,
                                           const double* stars, size_t star_count) {
  return guard([&] {
    require(options, "options");
    if (count > 0) require(lambdas, "lambdas");
    if (star_count > 0) require(stars, "stars");
    auto check = [](const double* v, size_t m) {
      for (size_t i = 0; i < m; ++i)
        if (!(v[i] >= 0.0) || !std::isfinite(v[i]))
          gsvcm::fail(gsvcm::ErrorKind::InvalidArgument, "grid values must be finite and nonnegative");
    };
    check(lambdas, count);
    check(stars, star_count);
    options->lambdas.assign(lambdas, lambdas + count);
    options->stars.assign(stars, stars + star_count);
  });
}

gsvcm_status gsvcm_options_set_grid_scale(gsvcm_options* options, const char* scale) {
  return guard([&] {
    require(options, "options");
    require(scale, "scale");
    const std::string s(scale);
    if (s == "relative") options->pipeline.grid_options = gsvcm::GridOptions{};
    else if (s == "rate") options->pipeline.grid_options = gsvcm::GridOptions::rate_tied();
    else gsvcm::fail(gsvcm::ErrorKind::InvalidArgument, "unknown grid scale '" + s + "'");
  });
}

gsvcm_status gsvcm_options_set_threads(gsvcm_options* options, unsigned threads) {
  return guard([&] {
    require(options, "options");
    options->pipeline.threads = threads == 0 ? 1 : threads;
  });
}

gsvcm_status gsvcm_fit_run(const gsvcm_dataset* data, const gsvcm_options* options, gsvcm_fit** out) {
  return guard([&] {
    require(data, "dataset");
    require(out, "out");
    *out = new gsvcm_fit{gsvcm::fit_pipeline(data->data, resolved(options))};
  });
}

void gsvcm_fit_free(gsvcm_fit* fit) { delete fit; }

double gsvcm_fit_bandwidth(const gsvcm_fit* fit) { return fit ? fit->result.prepared.h : 0.0; }

gsvcm_status gsvcm_fit_selected_lambda(const gsvcm_fit* fit, double* lambda, double* lambda_star) {
  return guard([&] {
    require(fit, "fit");
    const auto& p = fit->result.tuning.report.penalty;
    if (lambda) *lambda = p.lambda;
    if (lambda_star) *lambda_star = p.lambda_star;
  });
}

gsvcm_status gsvcm_fit_report(const gsvcm_fit* fit, gsvcm_report** out) {
  return guard([&] {
    require(fit, "fit");
    require(out, "out");
    *out = new gsvcm_report{fit->result.tuning.report};
  });
}

gsvcm_status gsvcm_fit_write(const gsvcm_fit* fit, const char* dir, int curve_grid) {
  return guard([&] {
    require(fit, "fit");
    const auto p = prepare_dir(dir);
    gsvcm::write_report((p / "report.json").string(), fit->result.tuning.report);
    gsvcm::write_gic_table((p / "gic_table.csv").string(), fit->result.tuning.table);
    gsvcm::write_curves((p / "curves.csv").string(), fit->result.tuning.report, curve_grid);
  });
}

gsvcm_status gsvcm_report_read(const char* path, gsvcm_report** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new gsvcm_report{gsvcm::read_report(path)};
  });
}

gsvcm_status gsvcm_report_write(const gsvcm_report* report, const char* path) {
  return guard([&] {
    require(report, "report");
    require(path, "path");
    gsvcm::write_report(path, report->report);
  });
}

gsvcm_status gsvcm_report_to_json(const gsvcm_report* report, char** out) {
  return guard([&] {
    require(report, "report");
    require(out, "out");
    *out = duplicate(gsvcm::report_to_json(report->report));
  });
}

void gsvcm_report_free(gsvcm_report* report) { delete report; }

size_t gsvcm_report_d(const gsvcm_report* report) { return report ? static_cast<size_t>(report->report.d()) : 0; }

const char* gsvcm_report_family(const gsvcm_report* report) {
  if (report == nullptr) return "";
  switch (report->report.family) {
    case gsvcm::FamilyKind::PoissonLog: return "poisson";
    case gsvcm::FamilyKind::BernoulliLogit: return "logistic";
    case gsvcm::FamilyKind::GaussianIdentity: return "gaussian";
  }
  return "";
}

gsvcm_status gsvcm_report_verdict(const gsvcm_report* report, size_t j, gsvcm_verdict* kind, double* value) {
  return guard([&] {
    require(report, "report");
    if (j >= static_cast<size_t>(report->report.d()))
      gsvcm::fail(gsvcm::ErrorKind::InvalidArgument, "coefficient index out of range");
    const auto& v = report->report.verdicts[j];
    if (kind) *kind = static_cast<gsvcm_verdict>(static_cast<int>(v.kind));
    if (value) *value = v.kind == gsvcm::VerdictKind::Constant ? v.value : 0.0;
  });
}

gsvcm_status gsvcm_report_predict(const gsvcm_report* report, const double* u, const double* x, size_t rows, size_t d,
                                  double* out, size_t* failed_row) {
  return guard([&] {
    require(report, "report");
    require(u, "u");
    require(x, "x");
    require(out, "out");
    if (d != static_cast<size_t>(report->report.d()))
      gsvcm::fail(gsvcm::ErrorKind::InvalidArgument, "covariate count " + std::to_string(d) +
                                                         " does not match the report (" +
                                                         std::to_string(report->report.d()) + ")");
    const gsvcm::Family family(report->report.family);
    for (size_t i = 0; i < rows; ++i) {
      const gsvcm::Vector xi = Eigen::Map<const gsvcm::Vector>(x + i * d, static_cast<gsvcm::Index>(d));
      try {
        out[i] = gsvcm::predict(report->report, family, u[i], xi);
      } catch (const gsvcm::Error& e) {
        if (failed_row) *failed_row = i;
        gsvcm::fail(e.kind(), "row " + std::to_string(i + 1) + ": " + e.what());
      }
    }
  });
}

gsvcm_status gsvcm_report_predict_csv(const gsvcm_report* report, const char* input, const char* output) {
  return guard([&] {
    require(report, "report");
    require(input, "input");
    require(output, "output");
    const gsvcm::NewRows rows = gsvcm::read_new_rows_csv(input);
    if (rows.x.cols() != report->report.d())
      gsvcm::fail(gsvcm::ErrorKind::Input, std::string(input) + ": " + std::to_string(rows.x.cols()) +
                                               " covariates, the report has " + std::to_string(report->report.d()));
    const gsvcm::Family family(report->report.family);
    std::vector<double> pred(static_cast<std::size_t>(rows.u.size()));
    for (gsvcm::Index i = 0; i < rows.u.size(); ++i) {
      try {
        pred[static_cast<std::size_t>(i)] = gsvcm::predict(report->report, family, rows.u[i], rows.x.row(i).transpose());
      } catch (const gsvcm::Error& e) {
        gsvcm::fail(e.kind(), "row " + std::to_string(i + 1) + ": " + e.what());
      }
    }
    std::ofstream f(output, std::ios::binary);
    if (!f) gsvcm::fail(gsvcm::ErrorKind::Io, std::string("cannot write ") + output);
    f << "row,u,prediction\n";
    for (gsvcm::Index i = 0; i < rows.u.size(); ++i)
      f << i + 1 << ',' << gsvcm::format_double(rows.u[i]) << ','
        << gsvcm::format_double(pred[static_cast<std::size_t>(i)]) << '\n';
  });
}

gsvcm_status gsvcm_simulate_run(const gsvcm_simulation_config* config, const gsvcm_options* options, const char* dir) {
  return guard([&] {
    require(config, "config");
    require(config->scenario, "scenario");
    if (config->reps < 1) gsvcm::fail(gsvcm::ErrorKind::InvalidArgument, "reps must be at least 1");
    gsvcm::HarnessOptions h;
    h.scenario = gsvcm::parse_scenario(config->scenario);
    if (config->n > 0) h.scenario.n = static_cast<gsvcm::Index>(config->n);
    if (config->d > 0) h.scenario.d = static_cast<gsvcm::Index>(config->d);
    if (config->u_dist != nullptr) {
      const std::string s(config->u_dist);
      if (s == "uniform") h.scenario.u_dist = gsvcm::IndexDistribution::Uniform;
      else if (s == "beta41") h.scenario.u_dist = gsvcm::IndexDistribution::Beta41;
      else gsvcm::fail(gsvcm::ErrorKind::InvalidArgument, "unknown index distribution '" + s + "'");
    }
    h.scenario.seed = config->seed;
    h.scenario.validate();
    h.reps = static_cast<gsvcm::Index>(config->reps);
    if (config->penalties != nullptr) {
      h.penalties.clear();
      std::stringstream list(config->penalties);
      std::string item;
      while (std::getline(list, item, ','))
        if (!item.empty()) h.penalties.push_back(gsvcm::parse_penalty(item));
      if (h.penalties.empty()) gsvcm::fail(gsvcm::ErrorKind::InvalidArgument, "no penalties given");
    }
    if (config->kappa != 0) h.kappa = config->kappa;
    if (config->a0 != 0.0) h.a0 = config->a0;
    h.threads = config->threads == 0 ? 1 : config->threads;
    h.pipeline = resolved(options);
    h.pipeline.threads = 1;
    const auto p = prepare_dir(dir);
    gsvcm::write_tables(gsvcm::run_harness(h), p.string());
  });
}

gsvcm_status gsvcm_rolling_predict(const gsvcm_dataset* series, size_t train, const gsvcm_options* options,
                                   const char* dir, double* mrpe_selected, double* mrpe_full) {
  return guard([&] {
    require(series, "series");
    const auto p = prepare_dir(dir);
    const gsvcm::PipelineOptions opts = resolved(options);
    const auto r = gsvcm::rolling_prediction(series->data, static_cast<gsvcm::Index>(train), opts);
    {
      std::ofstream f(p / "predictions.csv", std::ios::binary);
      if (!f) gsvcm::fail(gsvcm::ErrorKind::Io, "cannot write predictions.csv");
      f << "row,u,actual,selected,full\n";
      for (gsvcm::Index t = 0; t < r.actual.size(); ++t) {
        const gsvcm::Index row = static_cast<gsvcm::Index>(train) + t;
        f << row + 1 << ',' << gsvcm::format_double(series->data.u()[row]) << ','
          << gsvcm::format_double(r.actual[t]) << ',' << gsvcm::format_double(r.selected[t]) << ','
          << gsvcm::format_double(r.full[t]) << '\n';
      }
    }
    {
      nlohmann::json s = {{"train", train},
                          {"predictions", r.actual.size()},
                          {"mrpe_selected", r.mrpe_selected},
                          {"mrpe_full", r.mrpe_full},
                          {"k1", r.report.k1},
                          {"k2", r.report.k2}};
      std::ofstream f(p / "summary.json", std::ios::binary);
      if (!f) gsvcm::fail(gsvcm::ErrorKind::Io, "cannot write summary.json");
      f << s.dump(2) << '\n';
    }
    gsvcm::write_report((p / "report.json").string(), r.report);
    if (mrpe_selected) *mrpe_selected = r.mrpe_selected;
    if (mrpe_full) *mrpe_full = r.mrpe_full;
  });
}

}  // extern "C"
