#ifndef GSVCM_H
#define GSVCM_H

/* C interface to the gsvcm library. Every call returns a gsvcm_status; on
 * failure gsvcm_last_error() holds a message for the calling thread.
 * Handles are opaque and owned by the caller until the matching _free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GSVCM_API __declspec(dllexport)
#else
#define GSVCM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gsvcm_status {
  GSVCM_OK = 0,
  GSVCM_ERR_INVALID_ARGUMENT = 1,
  GSVCM_ERR_INPUT = 2,
  GSVCM_ERR_NUMERIC = 3,
  GSVCM_ERR_OUT_OF_DOMAIN = 4,
  GSVCM_ERR_UNDEFINED_METRIC = 5,
  GSVCM_ERR_TUNING = 6,
  GSVCM_ERR_IO = 7,
  GSVCM_ERR_INTERNAL = 8
} gsvcm_status;

typedef enum gsvcm_verdict { GSVCM_ZERO = 0, GSVCM_CONSTANT = 1, GSVCM_VARYING = 2 } gsvcm_verdict;

typedef struct gsvcm_dataset gsvcm_dataset;
typedef struct gsvcm_options gsvcm_options;
typedef struct gsvcm_fit gsvcm_fit;
typedef struct gsvcm_report gsvcm_report;

GSVCM_API const char* gsvcm_version(void);
GSVCM_API const char* gsvcm_last_error(void);
GSVCM_API const char* gsvcm_status_name(gsvcm_status status);
/* Frees strings returned through char** out-parameters. */
GSVCM_API void gsvcm_string_free(char* s);

/* ---- data ---- */

/* x is row-major n x d. */
GSVCM_API gsvcm_status gsvcm_dataset_create(const double* u, const double* x, const double* y, size_t n, size_t d,
                                            gsvcm_dataset** out);
/* Header u, y, x1..xd. */
GSVCM_API gsvcm_status gsvcm_dataset_read_csv(const char* path, gsvcm_dataset** out);
GSVCM_API gsvcm_status gsvcm_dataset_write_csv(const gsvcm_dataset* data, const char* path);
GSVCM_API size_t gsvcm_dataset_n(const gsvcm_dataset* data);
GSVCM_API size_t gsvcm_dataset_d(const gsvcm_dataset* data);
/* First `rows` observations. */
GSVCM_API gsvcm_status gsvcm_dataset_head(const gsvcm_dataset* data, size_t rows, gsvcm_dataset** out);
GSVCM_API void gsvcm_dataset_free(gsvcm_dataset* data);

/* scenario: ex51, ex52-I, ex52-II, ex52-III, ex53. n = 0 or d = 0 keep the
 * scenario default; u_dist is "uniform" or "beta41" (NULL for uniform). */
GSVCM_API gsvcm_status gsvcm_simulate_dataset(const char* scenario, size_t n, size_t d, const char* u_dist,
                                              uint64_t seed, gsvcm_dataset** out);
/* Synthetic Poisson series for the rolling prediction protocol. */
GSVCM_API gsvcm_status gsvcm_rolling_series(size_t total, uint64_t seed, gsvcm_dataset** out);

/* ---- options ---- */

GSVCM_API gsvcm_status gsvcm_options_create(gsvcm_options** out);
GSVCM_API void gsvcm_options_free(gsvcm_options* options);
/* poisson | logistic | gaussian */
GSVCM_API gsvcm_status gsvcm_options_set_family(gsvcm_options* options, const char* family);
/* scad | aglasso */
GSVCM_API gsvcm_status gsvcm_options_set_penalty(gsvcm_options* options, const char* penalty);
GSVCM_API gsvcm_status gsvcm_options_set_kappa(gsvcm_options* options, int kappa);
GSVCM_API gsvcm_status gsvcm_options_set_a0(gsvcm_options* options, double a0);
/* h <= 0 restores the default bandwidth rule. */
GSVCM_API gsvcm_status gsvcm_options_set_bandwidth(gsvcm_options* options, double h);
/* Explicit (lambda, lambda*) grid: the cross product of the two lists, or
 * lambda* = lambda when stars is NULL. An empty lambda list restores the
 * default grid. */
GSVCM_API gsvcm_status gsvcm_options_set_lambda_grid(gsvcm_options* options, const double* lambdas, size_t count,
                                                     const double* stars, size_t star_count);
/* "relative" (fractions of lambda_max, 2-D) or "rate" (multiples of
 * sqrt(log d / n), lambda* = lambda). */
GSVCM_API gsvcm_status gsvcm_options_set_grid_scale(gsvcm_options* options, const char* scale);
GSVCM_API gsvcm_status gsvcm_options_set_threads(gsvcm_options* options, unsigned threads);

/* ---- fitting ---- */

GSVCM_API gsvcm_status gsvcm_fit_run(const gsvcm_dataset* data, const gsvcm_options* options, gsvcm_fit** out);
GSVCM_API void gsvcm_fit_free(gsvcm_fit* fit);
GSVCM_API double gsvcm_fit_bandwidth(const gsvcm_fit* fit);
GSVCM_API gsvcm_status gsvcm_fit_selected_lambda(const gsvcm_fit* fit, double* lambda, double* lambda_star);
/* Copy of the selected structure report. */
GSVCM_API gsvcm_status gsvcm_fit_report(const gsvcm_fit* fit, gsvcm_report** out);
/* report.json, gic_table.csv and curves.csv in dir. curve_grid > 0 evaluates
 * the curves on that many evenly spaced points instead of the knots. */
GSVCM_API gsvcm_status gsvcm_fit_write(const gsvcm_fit* fit, const char* dir, int curve_grid);

/* ---- reports ---- */

GSVCM_API gsvcm_status gsvcm_report_read(const char* path, gsvcm_report** out);
GSVCM_API gsvcm_status gsvcm_report_write(const gsvcm_report* report, const char* path);
GSVCM_API gsvcm_status gsvcm_report_to_json(const gsvcm_report* report, char** out);
GSVCM_API void gsvcm_report_free(gsvcm_report* report);
GSVCM_API size_t gsvcm_report_d(const gsvcm_report* report);
/* "poisson", "logistic" or "gaussian"; static storage. */
GSVCM_API const char* gsvcm_report_family(const gsvcm_report* report);
/* j is 0-based. value is the constant for GSVCM_CONSTANT, 0 otherwise. */
GSVCM_API gsvcm_status gsvcm_report_verdict(const gsvcm_report* report, size_t j, gsvcm_verdict* kind,
                                            double* value);
/* Mean response for `rows` new points (x row-major rows x d). On an
 * out-of-domain u, *failed_row (if not NULL) receives the 0-based row. */
GSVCM_API gsvcm_status gsvcm_report_predict(const gsvcm_report* report, const double* u, const double* x, size_t rows,
                                            size_t d, double* out, size_t* failed_row);

/* Reads rows (header u, [y,] x1..xd) from input and writes predictions.csv
 * style output (row, u, prediction) to output. */
GSVCM_API gsvcm_status gsvcm_report_predict_csv(const gsvcm_report* report, const char* input, const char* output);

/* ---- simulation and rolling prediction ---- */

typedef struct gsvcm_simulation_config {
  const char* scenario;  /* required */
  size_t reps;
  uint64_t seed;
  size_t n;              /* 0: scenario default */
  size_t d;              /* 0: scenario default */
  const char* u_dist;    /* NULL: uniform */
  const char* penalties; /* comma list of scad, aglasso; NULL: both */
  int kappa;             /* 0: 1 */
  double a0;             /* 0: 3.7 */
  unsigned threads;      /* 0: 1 */
} gsvcm_simulation_config;

/* Runs the Monte-Carlo harness and writes table1.csv, table2.csv and
 * ree.csv into dir. options (may be NULL) supplies bandwidth and grid. */
GSVCM_API gsvcm_status gsvcm_simulate_run(const gsvcm_simulation_config* config, const gsvcm_options* options,
                                          const char* dir);

/* Selects on the first `train` rows, predicts each later row one step
 * ahead, writes predictions.csv and summary.json into dir. */
GSVCM_API gsvcm_status gsvcm_rolling_predict(const gsvcm_dataset* series, size_t train, const gsvcm_options* options,
                                             const char* dir, double* mrpe_selected, double* mrpe_full);

#ifdef __cplusplus
}
#endif

#endif
