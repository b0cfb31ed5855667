#pragma once

#include <Eigen/Dense>
#include <variant>

namespace sldlab {

/// Linear map W stored either densely or as s * B B^T with orthonormal B.
class LinearEstimator {
 public:
  struct Dense {
    Eigen::MatrixXd w;
  };
  struct ScaledProjection {
    double scale = 1.0;
    Eigen::MatrixXd basis;  // n x r, orthonormal columns
  };

  /// Throws Error(InvariantViolation) on non-finite entries.
  static LinearEstimator dense(Eigen::MatrixXd w);

  /// Throws Error(InvariantViolation) when `basis` is not orthonormal to
  /// `tol`. An empty basis (r = 0) is the zero map.
  static LinearEstimator scaled_projection(double scale, Eigen::MatrixXd basis,
                                           double tol = 1e-10);

  static LinearEstimator zero(Eigen::Index n);

  bool is_dense() const noexcept { return std::holds_alternative<Dense>(form_); }
  const Dense* as_dense() const noexcept { return std::get_if<Dense>(&form_); }
  const ScaledProjection* as_scaled_projection() const noexcept {
    return std::get_if<ScaledProjection>(&form_);
  }

  Eigen::Index dim() const noexcept;
  Eigen::MatrixXd to_dense() const;

  /// W * Y, column by column.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& y) const;

 private:
  using Form = std::variant<Dense, ScaledProjection>;
  explicit LinearEstimator(Form form) : form_(std::move(form)) {}

  Form form_;
};

}  // namespace sldlab
