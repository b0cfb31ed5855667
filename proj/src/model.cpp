#include "sldlab/model.hpp"

#include <cmath>
#include <string>

#include "sldlab/error.hpp"

namespace sldlab {

void ModelParams::validate() const {
  if (d < 1 || n < 1 || d >= n) {
    throw Error(ErrorCode::Dimension, "model requires 1 <= d < n, got d=" +
                                          std::to_string(d) + ", n=" + std::to_string(n));
  }
  if (!std::isfinite(sigma_z) || sigma_z < 0.0) {
    throw Error(ErrorCode::InvalidArgument,
                "sigma_z must be finite and nonnegative, got " + std::to_string(sigma_z));
  }
}

double orthonormality_defect(const Eigen::MatrixXd& b) {
  if (b.cols() == 0) return 0.0;
  const Eigen::MatrixXd gram = b.transpose() * b;
  return (gram - Eigen::MatrixXd::Identity(b.cols(), b.cols())).cwiseAbs().maxCoeff();
}

SubspaceBasis SubspaceBasis::from_matrix(Eigen::MatrixXd u, double tol, std::uint64_t id) {
  if (u.cols() < 1 || u.rows() <= u.cols()) {
    throw Error(ErrorCode::Dimension, "basis must be n x d with 1 <= d < n");
  }
  if (!u.allFinite() || orthonormality_defect(u) > tol) {
    throw Error(ErrorCode::InvariantViolation, "basis columns are not orthonormal");
  }
  return SubspaceBasis(std::move(u), id);
}

SubspaceBasis sample_basis(Index n, Index d, std::uint64_t seed) {
  if (d < 1 || n < 1 || d >= n) {
    throw Error(ErrorCode::Dimension, "sample_basis requires 1 <= d < n, got d=" +
                                          std::to_string(d) + ", n=" + std::to_string(n));
  }
  const std::uint64_t key = stream_key(seed, StreamRole::Basis);
  CounterRng rng(key);
  Eigen::MatrixXd g(n, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < n; ++i) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, d);
  const auto r = qr.matrixQR();
  for (Index j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return SubspaceBasis(std::move(q), hash_combine(key, static_cast<std::uint64_t>(n * 1000003 + d)));
}

void check_basis(const ModelParams& params, const SubspaceBasis& basis) {
  params.validate();
  if (basis.ambient_dim() != params.n || basis.dim() != params.d) {
    throw Error(ErrorCode::Dimension,
                "basis is " + std::to_string(basis.ambient_dim()) + "x" +
                    std::to_string(basis.dim()) + " but model has n=" +
                    std::to_string(params.n) + ", d=" + std::to_string(params.d));
  }
}

SampleStream::SampleStream(const ModelParams& params, const SubspaceBasis& basis,
                           std::uint64_t seed, StreamRole signal_role,
                           StreamRole noise_role)
    : params_(params),
      basis_(&basis),
      signal_(stream_key(seed, signal_role)),
      noise_(stream_key(seed, noise_role)) {
  check_basis(params, basis);
}

void SampleStream::next(Index count, Eigen::MatrixXd& coeffs, Eigen::MatrixXd& clean,
                        Eigen::MatrixXd& noisy) {
  const Index d = params_.d;
  const Index n = params_.n;
  coeffs.resize(d, count);
  noisy.resize(n, count);
  for (Index j = 0; j < count; ++j) {
    for (Index i = 0; i < d; ++i) coeffs(i, j) = signal_.normal();
  }
  clean.noalias() = basis_->matrix() * coeffs;
  if (params_.sigma_z == 0.0) {
    noisy = clean;
    return;
  }
  for (Index j = 0; j < count; ++j) {
    for (Index i = 0; i < n; ++i) noisy(i, j) = params_.sigma_z * noise_.normal();
  }
  noisy += clean;
}

Dataset sample_dataset(const ModelParams& params, const SubspaceBasis& basis, Index N,
                       std::uint64_t seed) {
  if (N < 1) throw Error(ErrorCode::EmptyDataset, "dataset size N must be >= 1");
  SampleStream stream(params, basis, seed);
  Dataset ds;
  Eigen::MatrixXd coeffs;
  stream.next(N, coeffs, ds.clean, ds.noisy);
  ds.params = params;
  ds.basis_id = basis.id();
  ds.seed = seed;
  return ds;
}

double optimal_risk(const ModelParams& params) {
  const double s2 = params.sigma_z * params.sigma_z;
  return s2 / (1.0 + s2);
}

double optimal_shrinkage(const ModelParams& params) {
  return 1.0 / (1.0 + params.sigma_z * params.sigma_z);
}

LinearEstimator optimal_estimator(const ModelParams& params, const SubspaceBasis& basis) {
  check_basis(params, basis);
  return LinearEstimator::scaled_projection(optimal_shrinkage(params), basis.matrix());
}

}  // namespace sldlab
