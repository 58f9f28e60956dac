#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ridgebounds/signal.hpp"
#include "ridgebounds/spectrum.hpp"

namespace ridgebounds {

// All unnamed absolute constants of the theory default to 1 and enter every
// evaluator through a single calibration_c knob, so reported values are the
// constant-free cores.

struct UpperBounds {
  double bias = 0.0;
  double variance = 0.0;
};

/// Conditioned upper bound, valid when the condition number of
/// A_k = lambda*I_n + X_tail X_tail^T is known to be at most L:
///   B <= c * L^4 * (tail_energy + head_inverse_energy * ((lambda + tail)/n)^2)
///   V <= c * sigma_eps^2 * t * L^2 * (k/n + n * tail_sq / (lambda + tail)^2)
UpperBounds upper_bounds_conditioned(const Spectrum& spec, const SignalSpec& sig,
                                     int n, double lambda, int k, double L, double t,
                                     double sigma_eps, double calibration_c = 1.0);

/// General upper bound in terms of the extreme eigenvalues mu1 >= mun > 0 of
/// A_k^{-1} (typically taken from estimator diagnostics). Valid for any
/// lambda keeping A_k positive definite, including negative lambda.
UpperBounds upper_bounds_general(const Spectrum& spec, const SignalSpec& sig, int n,
                                 double lambda, int k, double mu1_Ainv,
                                 double mun_Ainv, double t, double sigma_eps,
                                 double calibration_c = 1.0);

/// Variance lower bound (independent-coordinate designs, lambda >= 0):
///   V >= c * (1/n) * sum_i min{1, lambda_i^2 / (sigma_x^4 lambda_{k+1}^2 (rho_k + 2)^2)}.
double lower_bound_variance(const Spectrum& spec, int n, double lambda, int k,
                            double sigma_x, double calibration_c = 1.0);

/// Bias lower bound for the sign-flip prior around theta_bar (lambda >= 0):
///   E B >= (1/2) * sum_i lambda_i theta_bar_i^2 / (1 + lambda_i/(2 L lambda_{k+1} rho_k))^2.
double lower_bound_bias(const Spectrum& spec, const std::vector<double>& theta_bar,
                        double lambda, int n, int k, double L);

/// The matched upper/lower pair whose ratio is capped purely in terms of
/// rho_k. These are exact formulas with no hidden constants.
struct MatchedBounds {
  double B_under = 0.0;
  double B_over = 0.0;
  double V_under = 0.0;
  double V_over = 0.0;
};

MatchedBounds matched_bounds(const Spectrum& spec, const SignalSpec& sig, int n,
                             double lambda, int k);

struct RatioCaps {
  double B_cap = 0.0;
  double V_cap = 0.0;
};

/// Caps for rho_k known to lie in (a, b), 0 < a < rho_k < b:
///   B_over/B_under <= max{(1+b)^2, (1+1/a)^2},
///   V_over/V_under <= max{(2+b)^2, (1+2/a)^2}.
RatioCaps ratio_caps_interval(double rho_k, double a, double b);

/// Caps when k = min{l : rho_l > b} with b > 1/n (same formulas with a = b).
RatioCaps ratio_caps_kstar(double rho_k, double b, int n);

/// Per-component mixture weights: with w = (rho_k * lambda_{k+1})^2,
///   B_i = lambda_i |theta_i|^2 * w / (w + lambda_i^2),
///   V_i = (1/n) * lambda_i^2 / (w + lambda_i^2).
struct ComponentwiseBounds {
  std::vector<double> bias;
  std::vector<double> variance;
};

ComponentwiseBounds componentwise_bounds(const Spectrum& spec, const SignalSpec& sig,
                                         int n, double lambda, int k);

enum class EnvelopeContext { a_k, a_0, rho_lower };

std::string to_string(EnvelopeContext context);

/// Predicted high-probability envelope on the extreme eigenvalues of A_k or A_0.
struct EigEnvelope {
  double mu_min_pred = 0.0;
  double mu_max_pred = 0.0;
  EnvelopeContext context = EnvelopeContext::a_k;
};

/// Envelope on A_k = lambda*I_n + X_tail X_tail^T:
///   mu_max <= lambda + c sigma_x^2 (lambda_{k+1} (t + n) + tail_sum);
/// with a small-ball constant L additionally
///   mu_min >= lambda + tail_sum/L - c sigma_x^2 sqrt((t+n)(lambda_{k+1}^2 (t+n) + tail_sq)).
/// k == p (empty tail) is allowed and collapses the envelope to (lambda, lambda).
EigEnvelope eigenvalue_envelope_Ak(const Spectrum& spec, double lambda, int k, int n,
                                   double t, double sigma_x,
                                   std::optional<double> small_ball_L = std::nullopt,
                                   double calibration_c = 1.0);

/// Two-sided envelope on A_0 inherited from a conditioned A_k, valid when
/// lambda + sum_i lambda_i >= K n lambda_1 for some K > 1:
///   (1 - t sigma_x^2/n)(K-1)/(L K) * (lambda + S) <= mu_n(A_0)
///   <= mu_1(A_0) <= c sigma_x^2 (K+2)/K * (lambda + S).
EigEnvelope envelope_A0_from_Ak(const Spectrum& spec, double lambda, int n, double t,
                                double sigma_x, double L, double K,
                                double calibration_c = 1.0);

/// Constant-free floor on rho_k implied by cond(A_k) <= L: rho_k >= 1/(c L).
double rho_k_floor(double L, double calibration_c = 1.0);

// Regime presets: the three covariance/regularization regimes with their
// dedicated closed-form bounds.

struct LargeLambdaRegime {
  int k = 1;  // needs k >= 1: the bound references lambda_k
};

struct ZeroLambdaRegime {
  int k = 0;
  double lambda = 0.0;  // any value in [0, tail_sum)
};

struct NegativeLambdaRegime {
  int k = 0;
  double xi = 2.0;  // lambda is derived from xi, see RegimeBounds::lambda_used
};

using Regime = std::variant<LargeLambdaRegime, ZeroLambdaRegime, NegativeLambdaRegime>;

struct RegimeBounds {
  double lambda_used = 0.0;
  double bias_upper = 0.0;
  double variance_upper = 0.0;
  /// Constant-free check of the regime hypothesis (reported, never enforced:
  /// the absolute constants gating the underlying guarantees are unknown).
  bool hypothesis_ok = false;
  /// Which bound form was evaluated; in the negative regime this records the
  /// lambda(xi) rule: "plateau_tail" for constant tails, "general_tail" else.
  std::string form;
};

RegimeBounds regime_bounds(const Spectrum& spec, const SignalSpec& sig, int n,
                           const Regime& regime, double t, double sigma_eps,
                           double sigma_x);

// Assembled per-(lambda, k) report.

struct BoundConstants {
  double L = 1.0;
  double t = 1.0;
  double sigma_x = 1.0;
  double sigma_eps = 1.0;
  double calibration_c = 1.0;
};

struct CapInterval {
  double a = 0.0;
  double b = 0.0;
};

struct CapKStar {
  double b = 2.0;
};

using CapMode = std::variant<CapInterval, CapKStar>;

/// One row of bound evaluations. B_upper/V_upper carry the conditioned-bound
/// multipliers (L, t, sigma_eps, calibration_c); B_lower/V_lower are the
/// matched under-forms, so at the default constants upper and lower are
/// exactly the matched pair and the caps apply to their ratios.
struct BoundReport {
  double lambda = 0.0;
  int k = 0;
  EffectiveRanks effective;
  double B_upper = 0.0;
  double V_upper = 0.0;
  double B_lower = 0.0;
  double V_lower = 0.0;
  std::optional<double> B_ratio_cap;
  std::optional<double> V_ratio_cap;
  BoundConstants constants;
};

BoundReport make_bound_report(const Spectrum& spec, const SignalSpec& sig, int n,
                              double lambda, int k, const BoundConstants& constants,
                              const std::optional<CapMode>& cap_mode = std::nullopt);

}  // namespace ridgebounds
