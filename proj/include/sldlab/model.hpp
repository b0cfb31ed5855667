#pragma once

// Generative model: x = U c with c ~ N(0, I_d), y = x + z with
// z ~ N(0, sigma_z^2 I_n), where U is an n x d orthonormal basis.

#include <Eigen/Dense>
#include <cstdint>

#include "sldlab/linear_estimator.hpp"
#include "sldlab/rng.hpp"

namespace sldlab {

using Index = Eigen::Index;

struct ModelParams {
  Index d = 10;         // latent signal dimension
  Index n = 1000;       // ambient dimension
  double sigma_z = 0.1; // noise standard deviation

  /// Throws Error(Dimension) unless 1 <= d < n, Error(InvalidArgument) for
  /// negative or non-finite sigma_z.
  void validate() const;
};

class SubspaceBasis {
 public:
  /// Wraps an existing matrix; throws Error(InvariantViolation) when the
  /// columns are not orthonormal to `tol`.
  static SubspaceBasis from_matrix(Eigen::MatrixXd u, double tol = 1e-10,
                                   std::uint64_t id = 0);

  const Eigen::MatrixXd& matrix() const noexcept { return u_; }
  Index ambient_dim() const noexcept { return u_.rows(); }
  Index dim() const noexcept { return u_.cols(); }
  std::uint64_t id() const noexcept { return id_; }

 private:
  friend SubspaceBasis sample_basis(Index n, Index d, std::uint64_t seed);
  SubspaceBasis(Eigen::MatrixXd u, std::uint64_t id) : u_(std::move(u)), id_(id) {}

  Eigen::MatrixXd u_;
  std::uint64_t id_ = 0;
};

/// Max-abs entry of (B^T B - I).
double orthonormality_defect(const Eigen::MatrixXd& b);

struct Dataset {
  Eigen::MatrixXd clean;  // n x N, columns x_i
  Eigen::MatrixXd noisy;  // n x N, columns y_i
  ModelParams params;
  std::uint64_t basis_id = 0;
  std::uint64_t seed = 0;

  Index size() const noexcept { return clean.cols(); }
};

/// QR of an n x d Gaussian matrix, signs fixed so R has a positive diagonal.
SubspaceBasis sample_basis(Index n, Index d, std::uint64_t seed);

/// Sequential sample generator. Drawing N columns in one call or in several
/// blocks consumes the same coefficient and noise draws; sample_dataset is a
/// single-block draw.
class SampleStream {
 public:
  SampleStream(const ModelParams& params, const SubspaceBasis& basis,
               std::uint64_t seed, StreamRole signal_role = StreamRole::Signal,
               StreamRole noise_role = StreamRole::Noise);

  /// Fills `coeffs` (d x count), `clean` (n x count) and `noisy` (n x count).
  void next(Index count, Eigen::MatrixXd& coeffs, Eigen::MatrixXd& clean,
            Eigen::MatrixXd& noisy);

 private:
  ModelParams params_;
  const SubspaceBasis* basis_;
  CounterRng signal_;
  CounterRng noise_;
};

Dataset sample_dataset(const ModelParams& params, const SubspaceBasis& basis,
                       Index N, std::uint64_t seed);

/// Checks the basis shape against the model; throws Error(Dimension).
void check_basis(const ModelParams& params, const SubspaceBasis& basis);

/// sigma_z^2 / (1 + sigma_z^2), the risk of the optimal linear estimator.
double optimal_risk(const ModelParams& params);

/// 1 / (1 + sigma_z^2).
double optimal_shrinkage(const ModelParams& params);

/// W* = U U^T / (1 + sigma_z^2), in scaled-projection form.
LinearEstimator optimal_estimator(const ModelParams& params, const SubspaceBasis& basis);

}  // namespace sldlab
