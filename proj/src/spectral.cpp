#include "sldlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sldlab/error.hpp"

namespace sldlab {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr Index kStreamBlock = 256;

// Eigenvalues of a Gram matrix carry absolute error ~ eps * lambda_max, so
// the cut is applied to lambda rather than to sqrt(lambda).
Index gram_rank(const Eigen::VectorXd& eigenvalues_desc, Index n, Index N) {
  if (eigenvalues_desc.size() == 0 || !(eigenvalues_desc(0) > 0.0)) return 0;
  const double tol = static_cast<double>(std::max(n, N)) * kEps * eigenvalues_desc(0);
  Index r = 0;
  while (r < eigenvalues_desc.size() && eigenvalues_desc(r) > tol) ++r;
  return r;
}

// Eigen returns ascending eigenpairs; flip to descending and truncate.
void descending_eigen(const Eigen::MatrixXd& gram, Index n, Index N,
                      Eigen::MatrixXd& vectors, Eigen::VectorXd& values) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::Numerical, "Gram eigendecomposition did not converge");
  }
  Eigen::VectorXd lambda = eig.eigenvalues().reverse();
  const Index r = gram_rank(lambda, n, N);
  values = lambda.head(r).cwiseSqrt();
  vectors = eig.eigenvectors().rightCols(r).rowwise().reverse();
}

SpectralSummary ambient_gram_summary(const ModelParams& params, const SubspaceBasis& basis,
                                     Index N, std::uint64_t seed) {
  const Index n = params.n;
  SampleStream stream(params, basis, seed);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd coeff_cross = Eigen::MatrixXd::Zero(params.d, n);  // C Y^T
  Eigen::MatrixXd coeffs, clean, noisy;
  for (Index start = 0; start < N; start += kStreamBlock) {
    const Index count = std::min(kStreamBlock, N - start);
    stream.next(count, coeffs, clean, noisy);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(noisy);
    coeff_cross.noalias() += coeffs * noisy.transpose();
  }
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();

  SpectralSummary s;
  descending_eigen(gram, n, N, s.left, s.singular_values);
  // X V_y = X Y^T U_y S^{-1} = U (C Y^T) U_y S^{-1}.
  s.clean_right = basis.matrix() * (coeff_cross * s.left);
  s.clean_right = s.clean_right * s.singular_values.cwiseInverse().asDiagonal();
  s.rank_tol = static_cast<double>(std::max(n, N)) * kEps *
               (s.rank() > 0 ? s.singular_values(0) : 0.0);
  return s;
}

SpectralSummary sample_gram_summary(const Dataset& ds) {
  const Index n = ds.noisy.rows();
  const Index N = ds.noisy.cols();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(N, N);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(ds.noisy.transpose());
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();

  Eigen::MatrixXd right;
  SpectralSummary s;
  descending_eigen(gram, n, N, right, s.singular_values);
  const Eigen::VectorXd inv = s.singular_values.cwiseInverse();
  s.left = ds.noisy * right * inv.asDiagonal();
  s.clean_right = ds.clean * right;
  s.rank_tol = static_cast<double>(std::max(n, N)) * kEps *
               (s.rank() > 0 ? s.singular_values(0) : 0.0);
  return s;
}

}  // namespace

SpectralSummary summarize(const SvdCache& cache, const Eigen::MatrixXd& clean) {
  if (clean.cols() != cache.right.rows()) {
    throw Error(ErrorCode::Dimension, "clean matrix has " + std::to_string(clean.cols()) +
                                          " columns, SVD was taken of " +
                                          std::to_string(cache.right.rows()));
  }
  if (clean.rows() != cache.left.rows()) {
    throw Error(ErrorCode::Dimension, "clean and noisy matrices differ in row count");
  }
  SpectralSummary s;
  s.left = cache.left;
  s.singular_values = cache.singular_values;
  s.clean_right = clean * cache.right;
  s.rank_tol = cache.rank_tol;
  return s;
}

SpectralRoute choose_route(Index n, Index N) {
  if (N >= 2 * n) return SpectralRoute::AmbientGram;
  if (2 * N <= n) return SpectralRoute::SampleGram;
  return SpectralRoute::Svd;
}

SpectralSummary spectral_summary_for(const ModelParams& params, const SubspaceBasis& basis,
                                     Index N, std::uint64_t seed) {
  return spectral_summary_for(params, basis, N, seed, choose_route(params.n, N));
}

SpectralSummary spectral_summary_for(const ModelParams& params, const SubspaceBasis& basis,
                                     Index N, std::uint64_t seed, SpectralRoute route) {
  if (N < 1) throw Error(ErrorCode::EmptyDataset, "dataset size N must be >= 1");
  check_basis(params, basis);
  switch (route) {
    case SpectralRoute::AmbientGram:
      return ambient_gram_summary(params, basis, N, seed);
    case SpectralRoute::SampleGram:
      return sample_gram_summary(sample_dataset(params, basis, N, seed));
    case SpectralRoute::Svd:
      break;
  }
  const Dataset ds = sample_dataset(params, basis, N, seed);
  return summarize(svd_of(ds), ds.clean);
}

SpectralRiskEvaluator::SpectralRiskEvaluator(const SpectralSummary& summary,
                                             const SubspaceBasis& basis,
                                             const ModelParams& params)
    : summary_(&summary),
      u_(&basis.matrix()),
      d_(static_cast<double>(params.d)),
      sigma2_(params.sigma_z * params.sigma_z) {
  check_basis(params, basis);
  if (summary.left.rows() != params.n) {
    throw Error(ErrorCode::Dimension, "spectral summary does not match the model dimension");
  }
  projections_ = summary.left.transpose() * basis.matrix();
  column_norms_ = summary.clean_right.colwise().squaredNorm().transpose();
}

double SpectralRiskEvaluator::risk(const Eigen::VectorXd& filter) const {
  if (filter.size() != summary_->rank()) {
    throw Error(ErrorCode::Dimension, "filter length does not match the spectral rank");
  }
  const Eigen::MatrixXd mapped =
      summary_->clean_right * (filter.asDiagonal() * projections_);  // W U
  const double bias = (mapped - *u_).squaredNorm();
  const double variance = filter.cwiseAbs2().dot(column_norms_);
  return bias / d_ + sigma2_ * variance / d_;
}

LinearEstimator pca_estimator(const SpectralSummary& summary, const ModelParams& params) {
  params.validate();
  if (summary.left.rows() != params.n) {
    throw Error(ErrorCode::Dimension, "spectral summary does not match the model dimension");
  }
  const Index keep = std::min(params.d, summary.rank());
  return LinearEstimator::scaled_projection(optimal_shrinkage(params),
                                            summary.left.leftCols(keep), 1e-8);
}

LinearEstimator filtered_estimator(const SpectralSummary& summary,
                                   const Eigen::VectorXd& filter) {
  if (filter.size() != summary.rank()) {
    throw Error(ErrorCode::Dimension, "filter length does not match the spectral rank");
  }
  Eigen::MatrixXd w = (summary.clean_right * filter.asDiagonal()) * summary.left.transpose();
  if (!w.allFinite()) {
    throw Error(ErrorCode::Numerical, "filtered estimator has non-finite entries");
  }
  return LinearEstimator::dense(std::move(w));
}

KSelection select_stopping_time(const SpectralSummary& summary, const SubspaceBasis& basis,
                                const ModelParams& params, std::span<const Iterations> k_grid,
                                double eta) {
  if (k_grid.empty()) throw Error(ErrorCode::InvalidArgument, "k grid is empty");
  if (summary.rank() == 0) {
    // Y = 0: every iterate is the zero map.
    KSelection sel;
    sel.k_opt = k_grid.front();
    sel.risk = 1.0;
    sel.grid_risks.assign(k_grid.size(), 1.0);
    for (Iterations k : k_grid) sel.k_opt = std::min(sel.k_opt, k);
    for (Index i = 0; i < static_cast<Index>(k_grid.size()); ++i) {
      if (k_grid[static_cast<std::size_t>(i)] == sel.k_opt) { sel.index = i; break; }
    }
    return sel;
  }
  if (eta <= 0.0) eta = default_stepsize(summary.singular_values);

  const SpectralRiskEvaluator evaluator(summary, basis, params);
  const Eigen::VectorXd converged = gd_filter(summary.singular_values, eta, Iterations::infinity());
  KSelection sel;
  sel.grid_risks.reserve(k_grid.size());
  bool have = false;
  Eigen::VectorXd best_filter;
  for (std::size_t i = 0; i < k_grid.size(); ++i) {
    const Eigen::VectorXd filter = gd_filter(summary.singular_values, eta, k_grid[i]);
    const double r = evaluator.risk(filter);
    sel.grid_risks.push_back(r);
    if (!std::isfinite(r)) {
      throw Error(ErrorCode::Numerical, "non-finite risk at k=" + k_grid[i].to_string());
    }
    if (!have || r < sel.risk || (r == sel.risk && k_grid[i] < sel.k_opt)) {
      have = true;
      sel.risk = r;
      sel.k_opt = k_grid[i];
      sel.index = static_cast<Index>(i);
      best_filter = filter;
    }
  }
  if (!sel.k_opt.is_infinite() && best_filter == converged) {
    sel.k_opt = Iterations::infinity();
  }
  return sel;
}

}  // namespace sldlab
