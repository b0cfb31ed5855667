#include "sldlab/sldlab.h"

#include <cstring>
#include <exception>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "sldlab/curve_csv.hpp"
#include "sldlab/error.hpp"
#include "sldlab/powerlaw.hpp"
#include "sldlab/risk.hpp"
#include "sldlab/svg_plot.hpp"
#include "sldlab/sweep.hpp"

struct sld_curve {
  sldlab::RiskCurve curve;
  std::vector<std::string> columns;
};

namespace {

thread_local std::string g_last_error;

sld_status to_status(sldlab::ErrorCode code) {
  using sldlab::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return SLD_ERR_INVALID_ARGUMENT;
    case ErrorCode::Dimension: return SLD_ERR_DIMENSION;
    case ErrorCode::EmptyDataset: return SLD_ERR_EMPTY_DATASET;
    case ErrorCode::InsufficientData: return SLD_ERR_INSUFFICIENT_DATA;
    case ErrorCode::Domain: return SLD_ERR_DOMAIN;
    case ErrorCode::Numerical: return SLD_ERR_NUMERICAL;
    case ErrorCode::Stepsize: return SLD_ERR_STEPSIZE;
    case ErrorCode::Divergence: return SLD_ERR_DIVERGENCE;
    case ErrorCode::Unsupported: return SLD_ERR_UNSUPPORTED;
    case ErrorCode::InvariantViolation: return SLD_ERR_INVARIANT;
    case ErrorCode::Io: return SLD_ERR_IO;
    case ErrorCode::Parse: return SLD_ERR_PARSE;
  }
  return SLD_ERR_INTERNAL;
}

sld_status fail(sld_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs `fn`, translating exceptions into status codes.
template <class Fn>
sld_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return SLD_OK;
  } catch (const sldlab::Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SLD_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SLD_ERR_INTERNAL, e.what());
  }
}

sld_curve* wrap(sldlab::RiskCurve curve) {
  auto* handle = new sld_curve{std::move(curve), {}};
  handle->columns = sldlab::csv_columns(handle->curve);
  return handle;
}

sld_powerlaw to_c(const sldlab::PowerLawFit& fit) {
  sld_powerlaw out{};
  out.alpha = fit.alpha;
  out.log_beta = fit.log_beta;
  out.r_squared = fit.r_squared;
  out.sse = fit.sse;
  out.floor = fit.floor;
  out.region_lo = fit.region.lo;
  out.region_hi = fit.region.hi;
  out.n_points = fit.n_points;
  out.n_dropped = fit.dropped.size();
  return out;
}

sldlab::PowerLawFit from_c(const sld_powerlaw& fit) {
  sldlab::PowerLawFit out;
  out.alpha = fit.alpha;
  out.log_beta = fit.log_beta;
  return out;
}

}  // namespace

extern "C" {

const char* sld_version(void) { return SLDLAB_VERSION; }

const char* sld_last_error(void) { return g_last_error.c_str(); }

const char* sld_status_string(sld_status status) {
  switch (status) {
    case SLD_OK: return "ok";
    case SLD_ERR_NULL_POINTER: return "null pointer";
    case SLD_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case SLD_ERR_INTERNAL: return "internal error";
    default: break;
  }
  if (status >= SLD_ERR_INVALID_ARGUMENT && status <= SLD_ERR_PARSE) {
    return sldlab::to_string(static_cast<sldlab::ErrorCode>(status));
  }
  return "unknown status";
}

sld_status sld_optimal_risk(double sigma_z, double* out) {
  if (!out) return fail(SLD_ERR_NULL_POINTER, "out is NULL");
  if (!(sigma_z >= 0.0)) return fail(SLD_ERR_INVALID_ARGUMENT, "sigma_z must be >= 0");
  return guarded([&] {
    sldlab::ModelParams p;
    p.sigma_z = sigma_z;
    *out = sldlab::optimal_risk(p);
  });
}

sld_status sld_theory_diagnostics(int64_t d, int64_t n, double sigma_z, int64_t N,
                                  double* gamma, double* psi, double* floor) {
  return guarded([&] {
    const auto diag = sldlab::theory_diagnostics(sldlab::ModelParams{d, n, sigma_z}, N);
    if (gamma) *gamma = diag.gamma;
    if (psi) *psi = diag.psi;
    if (floor) *floor = diag.floor;
  });
}

sld_status sld_estimator_parse(const char* name, sld_estimator* out) {
  if (!name || !out) return fail(SLD_ERR_NULL_POINTER, "argument is NULL");
  const auto kind = sldlab::parse_estimator(name);
  if (!kind) {
    return fail(SLD_ERR_INVALID_ARGUMENT,
                std::string("unknown estimator '") + name + "' (expected opt, pca, esgd, pinv)");
  }
  *out = static_cast<sld_estimator>(*kind);
  g_last_error.clear();
  return SLD_OK;
}

void sld_sweep_config_init(sld_sweep_config* cfg) {
  if (!cfg) return;
  *cfg = sld_sweep_config{};
  cfg->d = 10;
  cfg->n = 1000;
  cfg->sigma_z = 0.1;
  cfg->n_seeds = 5;
  cfg->threads = 1;
}

sld_status sld_sweep_run(const sld_sweep_config* cfg, sld_progress_fn progress, void* user,
                         sld_curve** out) {
  if (!cfg || !out) return fail(SLD_ERR_NULL_POINTER, "argument is NULL");
  if ((cfg->n_train_sizes && !cfg->train_sizes) || (cfg->n_estimators && !cfg->estimators)) {
    return fail(SLD_ERR_NULL_POINTER, "array pointer is NULL");
  }
  *out = nullptr;
  return guarded([&] {
    sldlab::SweepConfig config;
    config.params = sldlab::ModelParams{cfg->d, cfg->n, cfg->sigma_z};
    config.train_sizes.assign(cfg->train_sizes, cfg->train_sizes + cfg->n_train_sizes);
    config.n_seeds = cfg->n_seeds;
    for (std::size_t i = 0; i < cfg->n_estimators; ++i) {
      const int e = static_cast<int>(cfg->estimators[i]);
      if (e < SLD_EST_OPT || e > SLD_EST_PINV) {
        throw sldlab::Error(sldlab::ErrorCode::InvalidArgument, "unknown estimator code");
      }
      config.estimators.push_back(static_cast<sldlab::EstimatorKind>(e));
    }
    config.base_seed = cfg->base_seed;
    config.mc_test_size = cfg->mc_test_size;
    sldlab::SweepOptions options;
    options.threads = cfg->threads;
    if (progress) {
      options.progress = [progress, user](std::size_t done, std::size_t total) {
        progress(done, total, user);
      };
    }
    *out = wrap(sldlab::run_sweep(config, options));
  });
}

sld_status sld_train_grid(int64_t lo, int64_t hi, int32_t points_per_decade, int64_t* out,
                          size_t capacity, size_t* count) {
  if (!count) return fail(SLD_ERR_NULL_POINTER, "count is NULL");
  std::vector<sldlab::Index> grid;
  const sld_status st =
      guarded([&] { grid = sldlab::default_train_grid(lo, hi, points_per_decade); });
  if (st != SLD_OK) return st;
  *count = grid.size();
  if (!out) return SLD_OK;
  if (capacity < grid.size()) return fail(SLD_ERR_BUFFER_TOO_SMALL, "grid buffer too small");
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = grid[i];
  return SLD_OK;
}

sld_status sld_curve_read_csv(const char* path, sld_csv_mode mode, sld_curve** out) {
  if (!path || !out) return fail(SLD_ERR_NULL_POINTER, "argument is NULL");
  *out = nullptr;
  return guarded([&] {
    if (mode == SLD_CSV_AUTO) {
      try {
        *out = wrap(sldlab::read_curve_csv(path, sldlab::CsvMode::Canonical));
        return;
      } catch (const sldlab::CsvParseError&) {
        // Header does not follow the <EST>_M/<EST>_S layout; read it bare.
      }
      *out = wrap(sldlab::read_curve_csv(path, sldlab::CsvMode::Bare));
      return;
    }
    *out = wrap(sldlab::read_curve_csv(
        path, mode == SLD_CSV_BARE ? sldlab::CsvMode::Bare : sldlab::CsvMode::Canonical));
  });
}

sld_status sld_curve_write_csv(const sld_curve* curve, const char* path) {
  if (!curve || !path) return fail(SLD_ERR_NULL_POINTER, "argument is NULL");
  return guarded([&] { sldlab::write_curve_csv(curve->curve, path); });
}

void sld_curve_free(sld_curve* curve) { delete curve; }

size_t sld_curve_num_rows(const sld_curve* curve) {
  return curve ? curve->curve.train_sizes.size() : 0;
}

size_t sld_curve_num_columns(const sld_curve* curve) {
  return curve ? curve->columns.size() : 0;
}

const char* sld_curve_column_name(const sld_curve* curve, size_t index) {
  if (!curve || index >= curve->columns.size()) return nullptr;
  return curve->columns[index].c_str();
}

sld_status sld_curve_column(const sld_curve* curve, const char* name, double* out,
                            size_t capacity) {
  if (!curve || !name || !out) return fail(SLD_ERR_NULL_POINTER, "argument is NULL");
  std::vector<double> column;
  const sld_status st = guarded([&] { column = sldlab::curve_column(curve->curve, name); });
  if (st != SLD_OK) return st;
  if (capacity < column.size()) return fail(SLD_ERR_BUFFER_TOO_SMALL, "column buffer too small");
  std::memcpy(out, column.data(), column.size() * sizeof(double));
  return SLD_OK;
}

void sld_fit_options_init(sld_fit_options* options) {
  if (!options) return;
  *options = sld_fit_options{};
  options->mode = SLD_FIT_SINGLE;
  options->min_seg = 3;
}

sld_status sld_fit(const double* n, const double* values, size_t count,
                   const sld_fit_options* options, sld_fit_result* out) {
  if (!n || !values || !options || !out) return fail(SLD_ERR_NULL_POINTER, "argument is NULL");
  return guarded([&] {
    std::vector<sldlab::CurvePoint> points(count);
    for (std::size_t i = 0; i < count; ++i) points[i] = {n[i], values[i]};
    std::optional<sldlab::IndexRange> region;
    if (options->region_hi != 0) region = sldlab::IndexRange{options->region_lo, options->region_hi};
    *out = sld_fit_result{};
    out->mode = options->mode;
    switch (options->mode) {
      case SLD_FIT_SINGLE:
        out->fit = to_c(sldlab::fit_powerlaw(points, region));
        break;
      case SLD_FIT_EXCESS:
        if (!options->has_floor) {
          throw sldlab::Error(sldlab::ErrorCode::InvalidArgument, "excess fit needs a floor");
        }
        out->fit = to_c(sldlab::fit_excess_powerlaw(points, options->floor, region));
        break;
      case SLD_FIT_SEGMENTED: {
        const auto seg = sldlab::fit_segmented(
            points, options->min_seg,
            options->has_floor ? std::optional<double>(options->floor) : std::nullopt, region);
        out->fit = to_c(seg.left);
        out->right = to_c(seg.right);
        out->break_index = seg.break_index;
        out->break_n = seg.break_n;
        out->total_sse = seg.total_sse;
        out->single_sse = seg.single_sse;
        out->sse_improvement = seg.sse_improvement;
        out->breakpoint_evidence = seg.breakpoint_evidence ? 1 : 0;
        break;
      }
      default:
        throw sldlab::Error(sldlab::ErrorCode::InvalidArgument, "unknown fit mode");
    }
  });
}

sld_status sld_predict(const sld_powerlaw* fit, double n, double* out) {
  if (!fit || !out) return fail(SLD_ERR_NULL_POINTER, "argument is NULL");
  return guarded([&] { *out = sldlab::predict(from_c(*fit), n); });
}

sld_status sld_solve_for_n(const sld_powerlaw* fit, double value, double* out) {
  if (!fit || !out) return fail(SLD_ERR_NULL_POINTER, "argument is NULL");
  return guarded([&] { *out = sldlab::solve_for_n(from_c(*fit), value); });
}

sld_status sld_curve_plot_svg(const sld_curve* curve, const sld_plot_options* options,
                              const char* path) {
  if (!curve || !path) return fail(SLD_ERR_NULL_POINTER, "argument is NULL");
  return guarded([&] {
    sldlab::PlotSpec spec;
    if (options) {
      if (options->title) spec.title = options->title;
      if (options->y_label) spec.y_label = options->y_label;
      if (options->width > 0) spec.width = options->width;
      if (options->height > 0) spec.height = options->height;
    }
    const auto& c = curve->curve;
    auto wanted = [&](const std::string& column) {
      if (!options || !options->columns) return true;
      for (std::size_t i = 0; i < options->n_columns; ++i) {
        if (column == options->columns[i]) return true;
      }
      return false;
    };
    for (const sldlab::Series& s : c.series) {
      const std::string column = s.std.empty() ? s.name : s.name + "_M";
      if (!wanted(column)) continue;
      spec.series.push_back(sldlab::PlotSeries{s.name, c.train_sizes, s.mean, s.std});
    }
    if (options && options->overlays) {
      for (std::size_t i = 0; i < options->n_overlays; ++i) {
        const sld_plot_overlay& o = options->overlays[i];
        spec.overlays.push_back(sldlab::PlotOverlay{o.label ? o.label : "", o.alpha, o.log_beta,
                                                    o.floor, o.n_lo, o.n_hi});
      }
    }
    if (spec.series.empty()) {
      throw sldlab::Error(sldlab::ErrorCode::InvalidArgument, "no series selected for plotting");
    }
    sldlab::write_loglog_svg(spec, path);
  });
}

}  // extern "C"
