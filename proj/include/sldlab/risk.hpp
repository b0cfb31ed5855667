#pragma once

// Population risk R(W) = E||W y - x||^2 / d and the quantities derived from
// it.

#include <Eigen/Dense>
#include <cstdint>

#include "sldlab/linear_estimator.hpp"
#include "sldlab/model.hpp"

namespace sldlab {

struct RiskReport {
  double closed_form = 0.0;
  double monte_carlo_mean = 0.0;
  double monte_carlo_se = 0.0;  // sample std of per-example losses / sqrt(n_test)
  Index n_test = 0;
};

struct TheoryDiagnostics {
  double gamma = 0.0;  // (d + n sigma^2) log(n) / N
  double psi = 0.0;    // n sigma^2 log(n) / N
  double floor = 0.0;  // sigma^2 / (1 + sigma^2)
  Index N = 0;
};

/// (1/d) ||(W - I) U||_F^2 + (sigma^2/d) ||W||_F^2. Scaled projections use
/// the factored expression
///   (1/d) [(s-1)^2 ||B^T U||^2 + d - ||B^T U||^2] + (sigma^2/d) s^2 r,
/// which never forms an n x n matrix.
double risk_closed_form(const LinearEstimator& w, const SubspaceBasis& basis,
                        const ModelParams& params);

/// The two-term Frobenius formula evaluated on a dense matrix.
double risk_closed_form_dense(const Eigen::MatrixXd& w, const SubspaceBasis& basis,
                              const ModelParams& params);

/// Empirical risk on `n_test` fresh samples drawn from the test streams of
/// `seed`. Throws Error(InsufficientData) when n_test < 2.
RiskReport risk_monte_carlo(const LinearEstimator& w, const SubspaceBasis& basis,
                            const ModelParams& params, Index n_test, std::uint64_t seed);

double excess_risk(const LinearEstimator& w, const SubspaceBasis& basis,
                   const ModelParams& params);

/// Risk of (1/(1+sigma^2)) U_hat U_hat^T via
///   (1+2 sigma^2)/(1+sigma^2)^2 * (1/d) ||U_hat_perp^T U||^2 + sigma^2/(1+sigma^2),
/// where ||U_hat_perp^T U||^2 = d - ||U_hat^T U||^2. The formula assumes
/// rank(U_hat) = d; for r < d the missing (d - r) shrinkage term is
/// included, see the implementation.
double pca_risk_specialized(const Eigen::MatrixXd& u_hat, const SubspaceBasis& basis,
                            const ModelParams& params);

TheoryDiagnostics theory_diagnostics(const ModelParams& params, Index N);

}  // namespace sldlab
