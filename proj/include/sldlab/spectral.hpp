#pragma once

// Spectral intermediates shared by the estimators and the sweep runner.
// Every estimator in this library is determined by U_y, S_y and X V_y, so a
// SpectralSummary is all a risk evaluation needs; it can be built from a
// full SVD or, for N >> n, from the n x n Gram matrix without ever storing
// the data.

#include <Eigen/Dense>
#include <cstdint>

#include "sldlab/estimators.hpp"
#include "sldlab/model.hpp"

namespace sldlab {

struct SpectralSummary {
  Eigen::MatrixXd left;             // U_y, n x r
  Eigen::VectorXd singular_values;  // descending
  Eigen::MatrixXd clean_right;      // X V_y, n x r
  double rank_tol = 0.0;

  Index rank() const noexcept { return singular_values.size(); }
};

SpectralSummary summarize(const SvdCache& cache, const Eigen::MatrixXd& clean);

enum class SpectralRoute { Svd, AmbientGram, SampleGram };

/// Route chosen by spectral_summary_for: a direct SVD when the data matrix is
/// close to square (n/2 < N < 2n), otherwise an eigendecomposition of the
/// smaller Gram matrix.
SpectralRoute choose_route(Index n, Index N);

/// Draws the training set of (params, basis, N, seed) exactly as
/// sample_dataset does and summarizes it. The AmbientGram (Y Y^T) route
/// streams the samples in blocks and keeps only O(n^2) memory.
SpectralSummary spectral_summary_for(const ModelParams& params, const SubspaceBasis& basis,
                                     Index N, std::uint64_t seed);
SpectralSummary spectral_summary_for(const ModelParams& params, const SubspaceBasis& basis,
                                     Index N, std::uint64_t seed, SpectralRoute route);

/// Risk of W = X V_y diag(f) U_y^T in O(n r d) per filter:
///   (1/d) ||X V_y diag(f) U_y^T U - U||^2 + (sigma^2/d) sum_i f_i^2 ||X v_i||^2.
class SpectralRiskEvaluator {
 public:
  SpectralRiskEvaluator(const SpectralSummary& summary, const SubspaceBasis& basis,
                        const ModelParams& params);

  double risk(const Eigen::VectorXd& filter) const;

 private:
  const SpectralSummary* summary_;
  const Eigen::MatrixXd* u_;
  Eigen::MatrixXd projections_;  // U_y^T U, r x d
  Eigen::VectorXd column_norms_; // ||X v_i||^2
  double d_;
  double sigma2_;
};

LinearEstimator pca_estimator(const SpectralSummary& summary, const ModelParams& params);

/// X V_y diag(filter) U_y^T.
LinearEstimator filtered_estimator(const SpectralSummary& summary,
                                   const Eigen::VectorXd& filter);

struct KSelection {
  Iterations k_opt;
  Eigen::Index index = 0;
  double risk = 0.0;
  std::vector<double> grid_risks;
};

/// Grid search behind early_stopped_estimator, without building W.
KSelection select_stopping_time(const SpectralSummary& summary, const SubspaceBasis& basis,
                                const ModelParams& params, std::span<const Iterations> k_grid,
                                double eta);

}  // namespace sldlab
