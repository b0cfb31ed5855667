#include "sldlab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sldlab/error.hpp"
#include "sldlab/spectral.hpp"

namespace sldlab {

std::string Iterations::to_string() const {
  return is_infinite() ? std::string("inf") : std::to_string(value_);
}

SvdCache svd_of(const Eigen::MatrixXd& noisy) {
  if (noisy.cols() < 1 || noisy.rows() < 1) {
    throw Error(ErrorCode::EmptyDataset, "svd_of needs a non-empty data matrix");
  }
  if (!noisy.allFinite()) {
    throw Error(ErrorCode::Numerical, "data matrix has non-finite entries");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(noisy, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw Error(ErrorCode::Numerical, "SVD did not converge");
  }
  const Eigen::VectorXd& s = svd.singularValues();
  SvdCache cache;
  const double top = s.size() > 0 ? s(0) : 0.0;
  cache.rank_tol = static_cast<double>(std::max(noisy.rows(), noisy.cols())) *
                   std::numeric_limits<double>::epsilon() * top;
  Index r = 0;
  while (r < s.size() && s(r) > cache.rank_tol) ++r;
  cache.singular_values = s.head(r);
  cache.left = svd.matrixU().leftCols(r);
  cache.right = svd.matrixV().leftCols(r);
  return cache;
}

SvdCache svd_of(const Dataset& dataset) { return svd_of(dataset.noisy); }

double default_stepsize(const Eigen::VectorXd& singular_values) {
  if (singular_values.size() == 0 || !(singular_values(0) > 0.0)) {
    throw Error(ErrorCode::Stepsize, "no positive singular value to set the stepsize from");
  }
  return 1.0 / (singular_values(0) * singular_values(0));
}

double default_stepsize(const SvdCache& cache) {
  return default_stepsize(cache.singular_values);
}

Eigen::VectorXd gd_filter(const Eigen::VectorXd& singular_values, double eta, Iterations k) {
  const Index r = singular_values.size();
  Eigen::VectorXd f(r);
  if (k.is_infinite()) {
    for (Index i = 0; i < r; ++i) f(i) = 1.0 / singular_values(i);
    return f;
  }
  if (k.count() == 0) return Eigen::VectorXd::Zero(r);
  if (!(eta > 0.0)) throw Error(ErrorCode::Stepsize, "stepsize must be positive");
  if (r > 0 && eta * singular_values(0) * singular_values(0) > 1.0 + 1e-12) {
    throw Error(ErrorCode::Stepsize,
                "stepsize violates eta * s_max^2 <= 1 (eta=" + std::to_string(eta) + ")");
  }
  const double steps = static_cast<double>(k.count());
  for (Index i = 0; i < r; ++i) {
    const double s = singular_values(i);
    const double x = std::min(eta * s * s, 1.0);
    // 1 - (1 - x)^k, accurate for small x.
    const double gain = x == 1.0 ? 1.0 : -std::expm1(steps * std::log1p(-x));
    f(i) = gain / s;
  }
  return f;
}

std::vector<Iterations> default_k_grid() {
  std::vector<Iterations> grid;
  grid.push_back(Iterations::finite(0));
  for (int p = 0; p <= 20; ++p) grid.push_back(Iterations::finite(std::uint64_t{1} << p));
  grid.push_back(Iterations::infinity());
  return grid;
}

LinearEstimator pca_estimator(const SvdCache& cache, const ModelParams& params) {
  params.validate();
  if (cache.left.rows() != params.n) {
    throw Error(ErrorCode::Dimension, "SVD does not match the model dimension");
  }
  const Index keep = std::min(params.d, cache.rank());
  return LinearEstimator::scaled_projection(optimal_shrinkage(params),
                                            cache.left.leftCols(keep), 1e-8);
}

LinearEstimator gd_estimator_closed(const SvdCache& cache, const Eigen::MatrixXd& clean,
                                    const GdConfig& cfg) {
  const SpectralSummary summary = summarize(cache, clean);
  if (cfg.k == Iterations::finite(0)) return LinearEstimator::zero(clean.rows());
  return filtered_estimator(summary, gd_filter(summary.singular_values, cfg.eta, cfg.k));
}

LinearEstimator gd_estimator_iterative(const Dataset& dataset, const GdConfig& cfg) {
  if (cfg.k.is_infinite()) {
    throw Error(ErrorCode::Unsupported, "iterative gradient descent needs a finite k");
  }
  const Eigen::MatrixXd& x = dataset.clean;
  const Eigen::MatrixXd& y = dataset.noisy;
  const Index n = y.rows();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  if (cfg.k.count() == 0) return LinearEstimator::dense(std::move(w));
  if (!(cfg.eta > 0.0)) throw Error(ErrorCode::Stepsize, "stepsize must be positive");

  // W <- W (I - eta Y Y^T) + eta X Y^T
  const Eigen::MatrixXd yyt = y * y.transpose();
  const Eigen::MatrixXd target = cfg.eta * (x * y.transpose());
  Eigen::MatrixXd next(n, n);
  for (std::uint64_t step = 0; step < cfg.k.count(); ++step) {
    next.noalias() = w * yyt;
    w = w - cfg.eta * next + target;
    if (!w.allFinite()) {
      throw Error(ErrorCode::Divergence,
                  "gradient descent diverged at step " + std::to_string(step + 1));
    }
  }
  return LinearEstimator::dense(std::move(w));
}

LinearEstimator pinv_estimator(const SvdCache& cache, const Eigen::MatrixXd& clean) {
  const SpectralSummary summary = summarize(cache, clean);
  return filtered_estimator(summary, gd_filter(summary.singular_values, 0.0,
                                               Iterations::infinity()));
}

EarlyStopResult early_stopped_estimator(const SvdCache& cache, const Eigen::MatrixXd& clean,
                                        const SubspaceBasis& basis, const ModelParams& params,
                                        std::span<const Iterations> k_grid, double eta) {
  const SpectralSummary summary = summarize(cache, clean);
  if (eta <= 0.0 && summary.rank() > 0) eta = default_stepsize(summary.singular_values);
  KSelection sel = select_stopping_time(summary, basis, params, k_grid, eta);
  LinearEstimator w = sel.k_opt == Iterations::finite(0) || summary.rank() == 0
                          ? LinearEstimator::zero(params.n)
                          : filtered_estimator(summary, gd_filter(summary.singular_values,
                                                                  eta, sel.k_opt));
  return EarlyStopResult{std::move(w), sel.k_opt, sel.risk, std::move(sel.grid_risks)};
}

}  // namespace sldlab
