#include "sldlab/risk.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sldlab/error.hpp"

namespace sldlab {
namespace {

void check_estimator(const LinearEstimator& w, const ModelParams& params) {
  if (w.dim() != params.n) {
    throw Error(ErrorCode::Dimension, "estimator is " + std::to_string(w.dim()) +
                                          "-dimensional but model has n=" +
                                          std::to_string(params.n));
  }
}

double factored_risk(double scale, const Eigen::MatrixXd& b, const SubspaceBasis& basis,
                     const ModelParams& params) {
  const double d = static_cast<double>(params.d);
  const double s2 = params.sigma_z * params.sigma_z;
  const double captured = (b.transpose() * basis.matrix()).squaredNorm();
  const double r = static_cast<double>(b.cols());
  return ((scale - 1.0) * (scale - 1.0) * captured + (d - captured)) / d +
         s2 * scale * scale * r / d;
}

}  // namespace

double risk_closed_form_dense(const Eigen::MatrixXd& w, const SubspaceBasis& basis,
                              const ModelParams& params) {
  check_basis(params, basis);
  if (w.rows() != params.n || w.cols() != params.n) {
    throw Error(ErrorCode::Dimension, "dense estimator must be n x n");
  }
  const Eigen::MatrixXd& u = basis.matrix();
  const double d = static_cast<double>(params.d);
  const double s2 = params.sigma_z * params.sigma_z;
  const Eigen::MatrixXd residual = w * u - u;
  return residual.squaredNorm() / d + s2 * w.squaredNorm() / d;
}

double risk_closed_form(const LinearEstimator& w, const SubspaceBasis& basis,
                        const ModelParams& params) {
  check_basis(params, basis);
  check_estimator(w, params);
  if (const auto* dense = w.as_dense()) {
    return risk_closed_form_dense(dense->w, basis, params);
  }
  const auto& p = *w.as_scaled_projection();
  return factored_risk(p.scale, p.basis, basis, params);
}

RiskReport risk_monte_carlo(const LinearEstimator& w, const SubspaceBasis& basis,
                            const ModelParams& params, Index n_test, std::uint64_t seed) {
  if (n_test < 2) {
    throw Error(ErrorCode::InsufficientData, "risk_monte_carlo needs n_test >= 2");
  }
  check_basis(params, basis);
  check_estimator(w, params);

  SampleStream stream(params, basis, seed, StreamRole::TestSignal, StreamRole::TestNoise);
  constexpr Index kBlock = 512;
  Eigen::MatrixXd coeffs, clean, noisy;
  // Welford accumulation keeps the variance stable for large n_test.
  double mean = 0.0;
  double m2 = 0.0;
  Index seen = 0;
  const double d = static_cast<double>(params.d);
  for (Index start = 0; start < n_test; start += kBlock) {
    const Index count = std::min(kBlock, n_test - start);
    stream.next(count, coeffs, clean, noisy);
    const Eigen::MatrixXd err = w.apply(noisy) - clean;
    for (Index j = 0; j < count; ++j) {
      const double loss = err.col(j).squaredNorm() / d;
      ++seen;
      const double delta = loss - mean;
      mean += delta / static_cast<double>(seen);
      m2 += delta * (loss - mean);
    }
  }
  RiskReport report;
  report.closed_form = risk_closed_form(w, basis, params);
  report.monte_carlo_mean = mean;
  const double variance = m2 / static_cast<double>(n_test - 1);
  report.monte_carlo_se = std::sqrt(variance / static_cast<double>(n_test));
  report.n_test = n_test;
  return report;
}

double excess_risk(const LinearEstimator& w, const SubspaceBasis& basis,
                   const ModelParams& params) {
  return risk_closed_form(w, basis, params) - optimal_risk(params);
}

double pca_risk_specialized(const Eigen::MatrixXd& u_hat, const SubspaceBasis& basis,
                            const ModelParams& params) {
  check_basis(params, basis);
  if (u_hat.rows() != params.n) {
    throw Error(ErrorCode::Dimension, "U_hat must have n rows");
  }
  if (!u_hat.allFinite() || orthonormality_defect(u_hat) > 1e-10) {
    throw Error(ErrorCode::InvariantViolation, "U_hat columns are not orthonormal");
  }
  const double s2 = params.sigma_z * params.sigma_z;
  const double d = static_cast<double>(params.d);
  const double r = static_cast<double>(u_hat.cols());
  const double q = (1.0 + s2) * (1.0 + s2);
  // ||U_hat_perp^T U||^2 = ||U||^2 - ||U_hat^T U||^2 = d - ||U_hat^T U||^2.
  const double missed = d - (u_hat.transpose() * basis.matrix()).squaredNorm();
  // The last term vanishes at r = d; it accounts for the noise passed by a
  // projector of rank r != d.
  return (1.0 + 2.0 * s2) / q * missed / d + s2 / (1.0 + s2) + s2 * (r - d) / (d * q);
}

TheoryDiagnostics theory_diagnostics(const ModelParams& params, Index N) {
  params.validate();
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "theory_diagnostics needs N >= 1");
  const double log_n = std::log(static_cast<double>(params.n));
  const double noise_dim = static_cast<double>(params.n) * params.sigma_z * params.sigma_z;
  TheoryDiagnostics diag;
  diag.gamma = (static_cast<double>(params.d) + noise_dim) * log_n / static_cast<double>(N);
  diag.psi = noise_dim * log_n / static_cast<double>(N);
  diag.floor = optimal_risk(params);
  diag.N = N;
  return diag;
}

}  // namespace sldlab
