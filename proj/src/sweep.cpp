#include "sldlab/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <mutex>
#include <thread>

#include "sldlab/risk.hpp"
#include "sldlab/rng.hpp"
#include "sldlab/spectral.hpp"

namespace sldlab {
namespace {

constexpr std::uint64_t kMonteCarloTag = 0x6d6f6e7465ULL;

bool needs_spectrum(const SweepConfig& config) {
  return std::any_of(config.estimators.begin(), config.estimators.end(),
                     [](EstimatorKind k) { return k != EstimatorKind::Opt; });
}

}  // namespace

std::string_view estimator_stem(EstimatorKind kind) noexcept {
  switch (kind) {
    case EstimatorKind::Opt: return "OPT";
    case EstimatorKind::Pca: return "PCA";
    case EstimatorKind::Esgd: return "ESGD";
    case EstimatorKind::Pinv: return "PINV";
  }
  return "?";
}

std::optional<EstimatorKind> parse_estimator(std::string_view name) noexcept {
  std::string upper(name);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (EstimatorKind k : {EstimatorKind::Opt, EstimatorKind::Pca, EstimatorKind::Esgd,
                          EstimatorKind::Pinv}) {
    if (upper == estimator_stem(k)) return k;
  }
  return std::nullopt;
}

void SweepConfig::validate() const {
  params.validate();
  if (train_sizes.empty()) {
    throw Error(ErrorCode::InvalidArgument, "train_sizes must be non-empty");
  }
  for (std::size_t i = 0; i < train_sizes.size(); ++i) {
    if (train_sizes[i] < 1) {
      throw Error(ErrorCode::InvalidArgument, "train sizes must be positive");
    }
    if (i > 0 && train_sizes[i] <= train_sizes[i - 1]) {
      throw Error(ErrorCode::InvalidArgument, "train_sizes must be strictly ascending");
    }
  }
  if (n_seeds < 1) throw Error(ErrorCode::InvalidArgument, "n_seeds must be >= 1");
  if (estimators.empty()) {
    throw Error(ErrorCode::InvalidArgument, "at least one estimator is required");
  }
  for (std::size_t i = 0; i < estimators.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (estimators[i] == estimators[j]) {
        throw Error(ErrorCode::InvalidArgument, "estimator " +
                                                    std::string(estimator_stem(estimators[i])) +
                                                    " requested twice");
      }
    }
  }
  if (mc_test_size < 0 || mc_test_size == 1) {
    throw Error(ErrorCode::InvalidArgument, "mc_test_size must be 0 or >= 2");
  }
  if (k_grid.empty()) throw Error(ErrorCode::InvalidArgument, "k grid must be non-empty");
}

const Series* RiskCurve::find(std::string_view name) const noexcept {
  for (const Series& s : series) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t n_index,
                        std::size_t seed_index) noexcept {
  return hash_combine(hash_combine(base_seed, n_index), seed_index);
}

std::vector<double> run_cell(const SweepConfig& config, std::size_t n_index,
                             std::size_t seed_index) {
  const ModelParams& params = config.params;
  const Index N = config.train_sizes.at(n_index);
  const std::uint64_t seed = cell_seed(config.base_seed, n_index, seed_index);
  const SubspaceBasis basis = sample_basis(params.n, params.d, seed);

  std::optional<SpectralSummary> summary;
  if (needs_spectrum(config)) summary = spectral_summary_for(params, basis, N, seed);

  std::vector<double> risks;
  std::vector<LinearEstimator> built;  // only kept for Monte-Carlo checks
  const bool monte_carlo = config.mc_test_size > 0;
  for (EstimatorKind kind : config.estimators) {
    switch (kind) {
      case EstimatorKind::Opt: {
        risks.push_back(optimal_risk(params));
        if (monte_carlo) built.push_back(optimal_estimator(params, basis));
        break;
      }
      case EstimatorKind::Pca: {
        LinearEstimator w = pca_estimator(*summary, params);
        risks.push_back(risk_closed_form(w, basis, params));
        if (monte_carlo) built.push_back(std::move(w));
        break;
      }
      case EstimatorKind::Esgd: {
        if (summary->rank() == 0) {
          risks.push_back(1.0);
          if (monte_carlo) built.push_back(LinearEstimator::zero(params.n));
          break;
        }
        const double eta = default_stepsize(summary->singular_values);
        const KSelection sel = select_stopping_time(*summary, basis, params, config.k_grid, eta);
        risks.push_back(sel.risk);
        if (monte_carlo) {
          built.push_back(filtered_estimator(
              *summary, gd_filter(summary->singular_values, eta, sel.k_opt)));
        }
        break;
      }
      case EstimatorKind::Pinv: {
        const Eigen::VectorXd filter =
            gd_filter(summary->singular_values, 0.0, Iterations::infinity());
        const SpectralRiskEvaluator evaluator(*summary, basis, params);
        risks.push_back(evaluator.risk(filter));
        if (monte_carlo) built.push_back(filtered_estimator(*summary, filter));
        break;
      }
    }
  }
  for (const double r : risks) {
    if (!std::isfinite(r)) throw Error(ErrorCode::Numerical, "non-finite risk");
  }
  if (monte_carlo) {
    const std::uint64_t mc_seed = hash_combine(seed, kMonteCarloTag);
    for (const LinearEstimator& w : built) {
      risks.push_back(
          risk_monte_carlo(w, basis, params, config.mc_test_size, mc_seed).monte_carlo_mean);
    }
  }
  return risks;
}

RiskCurve run_sweep(const SweepConfig& config, const SweepOptions& options) {
  config.validate();
  const std::size_t n_sizes = config.train_sizes.size();
  const std::size_t n_seeds = static_cast<std::size_t>(config.n_seeds);
  const std::size_t total = n_sizes * n_seeds;

  struct CellOutcome {
    std::vector<double> risks;
    std::optional<ErrorCode> code;
    std::string message;
  };
  std::vector<CellOutcome> cells(total);

  // Largest N first so long cells do not straggle at the end.
  std::vector<std::size_t> order(total);
  for (std::size_t i = 0; i < total; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return config.train_sizes[a / n_seeds] > config.train_sizes[b / n_seeds];
  });

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::atomic<bool> failed{false};
  std::mutex progress_mutex;

  auto worker = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t slot = next.fetch_add(1);
      if (slot >= total) return;
      const std::size_t cell = order[slot];
      CellOutcome& out = cells[cell];
      try {
        out.risks = run_cell(config, cell / n_seeds, cell % n_seeds);
      } catch (const Error& e) {
        out.code = e.code();
        out.message = e.what();
        failed.store(true);
      } catch (const std::exception& e) {
        out.code = ErrorCode::Numerical;
        out.message = e.what();
        failed.store(true);
      }
      const std::size_t finished = done.fetch_add(1) + 1;
      if (options.progress) {
        std::lock_guard lock(progress_mutex);
        options.progress(finished, total);
      }
    }
  };

  unsigned threads = options.threads == 0 ? std::thread::hardware_concurrency() : options.threads;
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(total)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (std::size_t cell = 0; cell < total; ++cell) {
    if (cells[cell].code) {
      const std::size_t ni = cell / n_seeds;
      const std::size_t si = cell % n_seeds;
      throw CellError(*cells[cell].code,
                      "cell (N=" + std::to_string(config.train_sizes[ni]) + ", N index " +
                          std::to_string(ni) + ", seed index " + std::to_string(si) +
                          ") failed: " + cells[cell].message,
                      ni, si);
    }
  }
  if (failed.load()) {
    throw Error(ErrorCode::Numerical, "sweep aborted");
  }

  RiskCurve curve;
  curve.config = config;
  for (Index N : config.train_sizes) curve.train_sizes.push_back(static_cast<double>(N));
  std::vector<std::string> names;
  for (EstimatorKind k : config.estimators) names.emplace_back(estimator_stem(k));
  if (config.mc_test_size > 0) {
    for (EstimatorKind k : config.estimators) names.push_back(std::string(estimator_stem(k)) + "_MC");
  }
  for (std::size_t e = 0; e < names.size(); ++e) {
    Series s;
    s.name = names[e];
    for (std::size_t ni = 0; ni < n_sizes; ++ni) {
      double sum = 0.0;
      for (std::size_t si = 0; si < n_seeds; ++si) sum += cells[ni * n_seeds + si].risks[e];
      const double mean = sum / static_cast<double>(n_seeds);
      double ss = 0.0;
      for (std::size_t si = 0; si < n_seeds; ++si) {
        const double dev = cells[ni * n_seeds + si].risks[e] - mean;
        ss += dev * dev;
      }
      s.mean.push_back(mean);
      s.std.push_back(n_seeds > 1 ? std::sqrt(ss / static_cast<double>(n_seeds - 1)) : 0.0);
    }
    curve.series.push_back(std::move(s));
  }
  return curve;
}

std::vector<Index> default_train_grid(Index lo, Index hi, int points_per_decade) {
  if (lo < 1 || hi <= lo) {
    throw Error(ErrorCode::InvalidArgument, "train grid needs 1 <= lo < hi, got " +
                                                std::to_string(lo) + ":" + std::to_string(hi));
  }
  if (points_per_decade < 1) {
    throw Error(ErrorCode::InvalidArgument, "points per decade must be >= 1");
  }
  // floor(ppd * decades) + 1 log-uniform points, both ends included.
  const double log_lo = std::log10(static_cast<double>(lo));
  const double log_hi = std::log10(static_cast<double>(hi));
  const auto intervals = static_cast<int>(
      std::floor(points_per_decade * (log_hi - log_lo) + 1e-9));
  std::vector<Index> grid;
  grid.push_back(lo);
  for (int i = 1; i < intervals; ++i) {
    const double e = log_lo + (log_hi - log_lo) * i / intervals;
    grid.push_back(static_cast<Index>(std::llround(std::pow(10.0, e))));
  }
  grid.push_back(hi);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

}  // namespace sldlab
