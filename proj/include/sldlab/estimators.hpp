#pragma once

// PCA shrinkage, early-stopped gradient descent and pseudoinverse estimators.
//
// Gradient descent on L(W) = ||W Y - X||_F^2 from W^0 = 0 with stepsize eta
// has the closed form W^k = X V_y D_k U_y^T, where Y = U_y S_y V_y^T and
// D_k = diag((1 - (1 - eta s_i^2)^k) / s_i).

#include <Eigen/Dense>
#include <compare>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sldlab/linear_estimator.hpp"
#include "sldlab/model.hpp"

namespace sldlab {

/// Thin SVD of the noisy data matrix, truncated at `rank_tol`.
struct SvdCache {
  Eigen::MatrixXd left;             // U_y, n x r
  Eigen::VectorXd singular_values;  // descending, all > rank_tol
  Eigen::MatrixXd right;            // V_y, N x r
  double rank_tol = 0.0;

  Index rank() const noexcept { return singular_values.size(); }
};

/// Number of gradient steps; `infinity()` is the converged limit.
class Iterations {
 public:
  constexpr Iterations() = default;
  static constexpr Iterations finite(std::uint64_t k) { return Iterations(k); }
  static constexpr Iterations infinity() { return Iterations(kInfinite); }

  constexpr bool is_infinite() const noexcept { return value_ == kInfinite; }
  /// Step count; meaningless for infinity().
  constexpr std::uint64_t count() const noexcept { return value_; }

  std::string to_string() const;

  friend constexpr auto operator<=>(Iterations, Iterations) = default;

 private:
  static constexpr std::uint64_t kInfinite = std::numeric_limits<std::uint64_t>::max();
  constexpr explicit Iterations(std::uint64_t v) : value_(v) {}
  std::uint64_t value_ = 0;
};

struct GdConfig {
  double eta = 0.0;
  Iterations k;
};

/// Thin SVD of Y (BDCSVD). Singular values at or below
/// max(n, N) * eps * s_max are dropped. Throws Error(EmptyDataset) for N = 0
/// and Error(Numerical) if the decomposition fails.
SvdCache svd_of(const Eigen::MatrixXd& noisy);
SvdCache svd_of(const Dataset& dataset);

/// 1 / s_max^2, the largest stepsize that keeps every filter entry in
/// [0, 1/s_i].
double default_stepsize(const SvdCache& cache);
double default_stepsize(const Eigen::VectorXd& singular_values);

/// Diagonal of D_k. Throws Error(Stepsize) when eta * s_max^2 > 1 + 1e-12 or
/// eta <= 0 (for finite k > 0).
Eigen::VectorXd gd_filter(const Eigen::VectorXd& singular_values, double eta, Iterations k);

/// {0, 1, 2, 4, ..., 2^20, infinity}.
std::vector<Iterations> default_k_grid();

LinearEstimator pca_estimator(const SvdCache& cache, const ModelParams& params);

LinearEstimator gd_estimator_closed(const SvdCache& cache, const Eigen::MatrixXd& clean,
                                    const GdConfig& cfg);

/// Runs k explicit gradient steps. Serves as the oracle for the closed form.
/// Throws Error(Unsupported) for k = infinity and Error(Divergence) as soon as
/// an iterate has a non-finite entry.
LinearEstimator gd_estimator_iterative(const Dataset& dataset, const GdConfig& cfg);

/// X Y^+ = X V_y S_y^{-1} U_y^T.
LinearEstimator pinv_estimator(const SvdCache& cache, const Eigen::MatrixXd& clean);

struct EarlyStopResult {
  LinearEstimator estimator;
  Iterations k_opt;
  double risk = 0.0;
  std::vector<double> grid_risks;  // risk_closed_form per grid entry
};

/// Oracle early stopping: picks the k in `k_grid` with the smallest true risk
/// (ties go to the smaller k). A finite k whose filter already equals the
/// converged filter bit for bit is the same estimator as W^inf and is
/// reported as infinity. `eta` <= 0 selects default_stepsize.
EarlyStopResult early_stopped_estimator(const SvdCache& cache, const Eigen::MatrixXd& clean,
                                        const SubspaceBasis& basis, const ModelParams& params,
                                        std::span<const Iterations> k_grid, double eta = 0.0);

}  // namespace sldlab
