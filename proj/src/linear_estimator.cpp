#include "sldlab/linear_estimator.hpp"

#include <cmath>

#include "sldlab/error.hpp"
#include "sldlab/model.hpp"

namespace sldlab {

LinearEstimator LinearEstimator::dense(Eigen::MatrixXd w) {
  if (w.rows() != w.cols()) {
    throw Error(ErrorCode::Dimension, "dense estimator must be square");
  }
  if (!w.allFinite()) {
    throw Error(ErrorCode::InvariantViolation, "dense estimator has non-finite entries");
  }
  return LinearEstimator(Dense{std::move(w)});
}

LinearEstimator LinearEstimator::scaled_projection(double scale, Eigen::MatrixXd basis,
                                                   double tol) {
  if (!std::isfinite(scale)) {
    throw Error(ErrorCode::InvariantViolation, "projection scale is not finite");
  }
  if (basis.cols() > basis.rows()) {
    throw Error(ErrorCode::Dimension, "projection basis has more columns than rows");
  }
  if (!basis.allFinite() || orthonormality_defect(basis) > tol) {
    throw Error(ErrorCode::InvariantViolation, "projection basis is not orthonormal");
  }
  return LinearEstimator(ScaledProjection{scale, std::move(basis)});
}

LinearEstimator LinearEstimator::zero(Eigen::Index n) {
  return LinearEstimator(Dense{Eigen::MatrixXd::Zero(n, n)});
}

Eigen::Index LinearEstimator::dim() const noexcept {
  if (const auto* d = as_dense()) return d->w.rows();
  return as_scaled_projection()->basis.rows();
}

Eigen::MatrixXd LinearEstimator::to_dense() const {
  if (const auto* d = as_dense()) return d->w;
  const auto& p = *as_scaled_projection();
  return p.scale * (p.basis * p.basis.transpose());
}

Eigen::MatrixXd LinearEstimator::apply(const Eigen::MatrixXd& y) const {
  if (y.rows() != dim()) {
    throw Error(ErrorCode::Dimension, "estimator and data dimensions differ");
  }
  if (const auto* d = as_dense()) return d->w * y;
  const auto& p = *as_scaled_projection();
  Eigen::MatrixXd coords = p.basis.transpose() * y;
  return p.scale * (p.basis * coords);
}

}  // namespace sldlab
