#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "ridgebounds/signal.hpp"
#include "ridgebounds/spectrum.hpp"

namespace ridgebounds {

/// Isotropic row distributions for the whitened design Z; the sampled design
/// is X = Z * Sigma^{1/2}, so rows of X * Sigma^{-1/2} have identity
/// covariance by construction.
enum class DesignFamily { gaussian, rademacher, uniform };

DesignFamily design_family_from_string(const std::string& name);
std::string to_string(DesignFamily family);

/// Deterministic given (family, spec, n, seed): entries are drawn row by row,
/// column within row, from a pinned generator (see rng.hpp).
Eigen::MatrixXd sample_design(DesignFamily family, const Spectrum& spec, int n,
                              std::uint64_t seed);

/// Gaussian noise vector with standard deviation sigma_eps, same pinned stream.
Eigen::VectorXd sample_noise(int n, double sigma_eps, std::uint64_t seed);

/// Relative positive-definiteness guard: the smallest eigenvalue of
/// lambda*I + X X^T must exceed kDefaultPdTolerance times the largest.
inline constexpr double kDefaultPdTolerance = 1e-10;

struct RidgeSolution {
  Eigen::VectorXd theta_hat;
  Eigen::VectorXd dual_weights;  // (lambda*I_n + X X^T)^{-1} y
  double lambda = 0.0;
  double pd_margin = 0.0;  // smallest eigenvalue of lambda*I_n + X X^T
};

/// Ridge fit through the dual n-by-n system, theta = X^T (lambda*I + X X^T)^{-1} y.
/// This is the primary path: it stays valid for negative lambda as long as the
/// dual system is positive definite, which the overparametrized regime allows.
/// Throws NotPositiveDefinite otherwise.
RidgeSolution ridge_fit_dual(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             double lambda, double pd_tolerance = kDefaultPdTolerance);

/// Testing oracle through the primal p-by-p system, restricted to lambda > 0
/// where positive definiteness is unconditional.
Eigen::VectorXd ridge_fit_primal_oracle(const Eigen::MatrixXd& X,
                                        const Eigen::VectorXd& y, double lambda);

/// Exact conditional bias given the realized design:
///   B = || (I - X^T A^{-1} X) theta* ||^2_Sigma,  A = lambda*I + X X^T.
double exact_bias(const Eigen::MatrixXd& X, const Spectrum& spec,
                  const SignalSpec& sig, double lambda,
                  double pd_tolerance = kDefaultPdTolerance);

/// Exact expected variance over the noise: sigma_eps^2 * tr(Sigma X^T A^{-2} X).
double exact_variance(const Eigen::MatrixXd& X, const Spectrum& spec, double lambda,
                      double sigma_eps, double pd_tolerance = kDefaultPdTolerance);

/// Variance for one realized noise draw: || X^T A^{-1} eps ||^2_Sigma.
double realized_variance(const Eigen::MatrixXd& X, const Spectrum& spec,
                         double lambda, const Eigen::VectorXd& eps,
                         double pd_tolerance = kDefaultPdTolerance);

/// Residual norm of the head-block identity
///   theta_hat_{0:k} + X_{0:k}^T A_k^{-1} X_{0:k} theta_hat_{0:k} = X_{0:k}^T A_k^{-1} y,
/// which holds exactly for the dual-form fit; the returned norm is pure
/// numerical error. Relative checks scale it by (1 + ||y||).
double identity_residual(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         double lambda, int k,
                         double pd_tolerance = kDefaultPdTolerance);

struct EigDiagnostics {
  double mu_max_Ak = 0.0;
  double mu_min_Ak = 0.0;
  double cond_Ak = 0.0;  // NaN unless pd
  bool pd = false;
  int k = 0;
};

/// Extreme eigenvalues of A_k = lambda*I_n + X_tail X_tail^T via a full
/// symmetric eigendecomposition (n is desk-scale). Non-PD is reported, not
/// thrown. k == p gives A_k = lambda*I with condition number 1.
EigDiagnostics eig_diagnostics(const Eigen::MatrixXd& X, double lambda, int k);

/// Smallest eigenvalue of the leave-one-column-out matrix
/// A_{-j} = lambda*I_n + sum_{i != j} x_i x_i^T (j is a 0-based column index).
double eig_min_loo(const Eigen::MatrixXd& X, double lambda, int j);

/// One (lambda, design) evaluation produced by RiskEvaluator.
struct RiskPoint {
  double lambda = 0.0;
  bool pd = false;
  double pd_margin = 0.0;
  double bias = 0.0;
  double variance_expected = 0.0;
  double mse = 0.0;
  double mu_max_Ak = 0.0;
  double mu_min_Ak = 0.0;
  double cond_Ak = 0.0;
};

/// Caches one eigendecomposition of the Gram matrix of X (on whichever side
/// of min(n, p) is smaller) so a whole lambda grid can be evaluated in
/// O(n p) per point. Exactly matches exact_bias / exact_variance; the unit
/// tests pin that agreement.
class RiskEvaluator {
 public:
  RiskEvaluator(const Eigen::MatrixXd& X, const Spectrum& spec, const SignalSpec& sig,
                double sigma_eps, int diagnostics_k);

  RiskPoint evaluate(double lambda, double pd_tolerance = kDefaultPdTolerance) const;

  double pd_margin(double lambda) const { return lambda + gram_min_eig_; }

 private:
  int n_;
  int p_;
  bool dual_side_;  // true when the cached factorization lives on the n-by-n side
  double sigma_eps_;
  Eigen::VectorXd gram_eigs_;       // eigenvalues of the factorized Gram
  Eigen::VectorXd signal_coeffs_;   // Q^T X theta (dual) or Q^T theta (primal)
  Eigen::VectorXd variance_weights_;
  Eigen::MatrixXd basis_;           // Q
  const Eigen::MatrixXd* X_;
  Eigen::VectorXd theta_;
  Eigen::VectorXd sigma_diag_;
  double gram_min_eig_ = 0.0;  // smallest eigenvalue of X X^T (zeros included)
  double gram_max_eig_ = 0.0;
  double tail_max_eig_ = 0.0;  // extremes of X_tail X_tail^T at diagnostics_k
  double tail_min_eig_ = 0.0;
  int diagnostics_k_ = 0;
};

}  // namespace ridgebounds
