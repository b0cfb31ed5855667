/*
 * sldlab C API.
 *
 * Opaque handles plus status codes; every function that can fail returns an
 * sld_status and leaves a human-readable message retrievable through
 * sld_last_error() on the calling thread. Handles returned through `out`
 * parameters are owned by the caller and released with the matching _free
 * function.
 */
#ifndef SLDLAB_H
#define SLDLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(SLDLAB_BUILDING_LIBRARY)
#define SLD_API __attribute__((visibility("default")))
#else
#define SLD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sld_status {
  SLD_OK = 0,
  SLD_ERR_INVALID_ARGUMENT = 1,
  SLD_ERR_DIMENSION = 2,
  SLD_ERR_EMPTY_DATASET = 3,
  SLD_ERR_INSUFFICIENT_DATA = 4,
  SLD_ERR_DOMAIN = 5,
  SLD_ERR_NUMERICAL = 6,
  SLD_ERR_STEPSIZE = 7,
  SLD_ERR_DIVERGENCE = 8,
  SLD_ERR_UNSUPPORTED = 9,
  SLD_ERR_INVARIANT = 10,
  SLD_ERR_IO = 11,
  SLD_ERR_PARSE = 12,
  SLD_ERR_NULL_POINTER = 13,
  SLD_ERR_BUFFER_TOO_SMALL = 14,
  SLD_ERR_INTERNAL = 15
} sld_status;

SLD_API const char* sld_version(void);
/* Message of the last failing call on this thread; "" if none. */
SLD_API const char* sld_last_error(void);
SLD_API const char* sld_status_string(sld_status status);

/* ---- model scalars ---------------------------------------------------- */

/* sigma^2 / (1 + sigma^2) */
SLD_API sld_status sld_optimal_risk(double sigma_z, double* out);

/* gamma = (d + n sigma^2) ln(n) / N, psi = n sigma^2 ln(n) / N. Any output
 * pointer may be NULL. */
SLD_API sld_status sld_theory_diagnostics(int64_t d, int64_t n, double sigma_z, int64_t N,
                                          double* gamma, double* psi, double* floor);

/* ---- sweeps ------------------------------------------------------------ */

typedef enum sld_estimator {
  SLD_EST_OPT = 0,
  SLD_EST_PCA = 1,
  SLD_EST_ESGD = 2,
  SLD_EST_PINV = 3
} sld_estimator;

/* Case-insensitive: "opt", "pca", "esgd", "pinv". */
SLD_API sld_status sld_estimator_parse(const char* name, sld_estimator* out);

typedef struct sld_sweep_config {
  int64_t d;
  int64_t n;
  double sigma_z;
  const int64_t* train_sizes; /* strictly ascending */
  size_t n_train_sizes;
  int32_t n_seeds;
  const sld_estimator* estimators; /* column order of the resulting curve */
  size_t n_estimators;
  uint64_t base_seed;
  int64_t mc_test_size; /* 0: closed-form risks only */
  uint32_t threads;     /* 0: hardware concurrency */
} sld_sweep_config;

/* d=10, n=1000, sigma=0.1, 5 seeds, base seed 0, 1 thread, no sizes. */
SLD_API void sld_sweep_config_init(sld_sweep_config* cfg);

typedef void (*sld_progress_fn)(size_t done, size_t total, void* user);

typedef struct sld_curve sld_curve;

SLD_API sld_status sld_sweep_run(const sld_sweep_config* cfg, sld_progress_fn progress,
                                 void* user, sld_curve** out);

/* Geometric train-size grid. With out == NULL only *count is set. */
SLD_API sld_status sld_train_grid(int64_t lo, int64_t hi, int32_t points_per_decade,
                                  int64_t* out, size_t capacity, size_t* count);

/* ---- curves ------------------------------------------------------------- */

typedef enum sld_csv_mode {
  SLD_CSV_CANONICAL = 0,
  SLD_CSV_BARE = 1,
  SLD_CSV_AUTO = 2 /* canonical, falling back to bare */
} sld_csv_mode;

SLD_API sld_status sld_curve_read_csv(const char* path, sld_csv_mode mode, sld_curve** out);
SLD_API sld_status sld_curve_write_csv(const sld_curve* curve, const char* path);
SLD_API void sld_curve_free(sld_curve* curve);

SLD_API size_t sld_curve_num_rows(const sld_curve* curve);
/* CSV columns including train_size. */
SLD_API size_t sld_curve_num_columns(const sld_curve* curve);
/* NULL when out of range; pointer valid for the curve's lifetime. */
SLD_API const char* sld_curve_column_name(const sld_curve* curve, size_t index);
/* Copies a column (train_size, <EST>_M, <EST>_S or a bare name). */
SLD_API sld_status sld_curve_column(const sld_curve* curve, const char* name, double* out,
                                    size_t capacity);

/* ---- power-law fits ----------------------------------------------------- */

typedef enum sld_fit_mode {
  SLD_FIT_SINGLE = 0,
  SLD_FIT_EXCESS = 1,
  SLD_FIT_SEGMENTED = 2
} sld_fit_mode;

typedef struct sld_fit_options {
  sld_fit_mode mode;
  int has_floor; /* excess: required; segmented: optional */
  double floor;
  size_t region_lo; /* half-open index range; region_hi == 0 means all */
  size_t region_hi;
  int32_t min_seg; /* segmented only */
} sld_fit_options;

SLD_API void sld_fit_options_init(sld_fit_options* options);

typedef struct sld_powerlaw {
  double alpha;
  double log_beta;
  double r_squared;
  double sse;
  double floor;
  size_t region_lo;
  size_t region_hi;
  size_t n_points;
  size_t n_dropped;
} sld_powerlaw;

typedef struct sld_fit_result {
  sld_fit_mode mode;
  sld_powerlaw fit;   /* single/excess fit, or the left segment */
  sld_powerlaw right; /* segmented only */
  size_t break_index;
  double break_n;
  double total_sse;
  double single_sse;
  double sse_improvement;
  int breakpoint_evidence;
} sld_fit_result;

SLD_API sld_status sld_fit(const double* n, const double* values, size_t count,
                           const sld_fit_options* options, sld_fit_result* out);

SLD_API sld_status sld_predict(const sld_powerlaw* fit, double n, double* out);
SLD_API sld_status sld_solve_for_n(const sld_powerlaw* fit, double value, double* out);

/* ---- plots -------------------------------------------------------------- */

typedef struct sld_plot_overlay {
  const char* label;
  double alpha;
  double log_beta;
  double floor;
  double n_lo;
  double n_hi;
} sld_plot_overlay;

typedef struct sld_plot_options {
  const char* title;   /* may be NULL */
  const char* y_label; /* may be NULL */
  int32_t width;       /* <= 0: default */
  int32_t height;
  const char* const* columns; /* series to draw; NULL: every mean column */
  size_t n_columns;
  const sld_plot_overlay* overlays;
  size_t n_overlays;
} sld_plot_options;

/* Log-log SVG of the curve: one polyline per mean column, error bars from the
 * matching std column. Byte-identical output for identical input. */
SLD_API sld_status sld_curve_plot_svg(const sld_curve* curve, const sld_plot_options* options,
                                      const char* path);

#ifdef __cplusplus
}
#endif

#endif /* SLDLAB_H */
