#pragma once

// Seeded risk-vs-N sweeps. Every (N, seed) cell is an independent work unit
// whose randomness is derived from (base_seed, N index, seed index) only, so
// results do not depend on scheduling.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sldlab/error.hpp"
#include "sldlab/estimators.hpp"
#include "sldlab/model.hpp"

namespace sldlab {

enum class EstimatorKind { Opt, Pca, Esgd, Pinv };

/// Column stem used in CSV headers: OPT, PCA, ESGD, PINV.
std::string_view estimator_stem(EstimatorKind kind) noexcept;
/// Case-insensitive inverse of estimator_stem.
std::optional<EstimatorKind> parse_estimator(std::string_view name) noexcept;

struct SweepConfig {
  ModelParams params;
  std::vector<Index> train_sizes;
  int n_seeds = 5;
  std::vector<EstimatorKind> estimators;
  std::uint64_t base_seed = 0;
  Index mc_test_size = 0;  // 0: closed-form risk only
  std::vector<Iterations> k_grid = default_k_grid();

  /// Throws Error(InvalidArgument) or Error(Dimension) describing the first
  /// violated constraint.
  void validate() const;
};

struct Series {
  std::string name;          // e.g. "ESGD"; CSV columns are name_M / name_S
  std::vector<double> mean;
  std::vector<double> std;   // sample std over seeds; empty for bare curves
};

struct RiskCurve {
  std::vector<double> train_sizes;
  std::vector<Series> series;
  std::optional<SweepConfig> config;

  const Series* find(std::string_view name) const noexcept;
};

struct SweepOptions {
  unsigned threads = 1;  // 0: std::thread::hardware_concurrency()
  std::function<void(std::size_t done, std::size_t total)> progress;
};

/// Cell failure; `what()` names the cell.
class CellError : public Error {
 public:
  CellError(ErrorCode code, const std::string& what, std::size_t n_index,
            std::size_t seed_index)
      : Error(code, what), n_index_(n_index), seed_index_(seed_index) {}

  std::size_t n_index() const noexcept { return n_index_; }
  std::size_t seed_index() const noexcept { return seed_index_; }

 private:
  std::size_t n_index_;
  std::size_t seed_index_;
};

std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t n_index,
                        std::size_t seed_index) noexcept;

/// Risks of every requested estimator on one cell, in config.estimators
/// order, followed by Monte-Carlo risks when mc_test_size > 0.
std::vector<double> run_cell(const SweepConfig& config, std::size_t n_index,
                             std::size_t seed_index);

/// Aborts with CellError on the first failing cell (in cell order).
RiskCurve run_sweep(const SweepConfig& config, const SweepOptions& options = {});

/// floor(points_per_decade * log10(hi/lo)) + 1 log-uniform points from lo to
/// hi inclusive, rounded to integers, deduplicated, ascending.
std::vector<Index> default_train_grid(Index lo, Index hi, int points_per_decade);

}  // namespace sldlab
