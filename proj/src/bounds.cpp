#include "ridgebounds/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "ridgebounds/errors.hpp"

namespace ridgebounds {

namespace {

double square(double x) { return x * x; }

void check_upper_preconditions(const Spectrum& spec, const SignalSpec& sig, int n,
                               int k) {
  check_signal(spec, sig);
  if (n < 1) throw ValidationError("n must be >= 1");
  if (k < 0 || k >= std::min(n, spec.dim())) {
    throw ValidationError("k must lie in [0, min(n, p))");
  }
}

}  // namespace

UpperBounds upper_bounds_conditioned(const Spectrum& spec, const SignalSpec& sig,
                                     int n, double lambda, int k, double L, double t,
                                     double sigma_eps, double calibration_c) {
  check_upper_preconditions(spec, sig, n, k);
  if (!(L >= 1.0)) throw ValidationError("condition number bound L must be >= 1");
  if (!(t > 0.0)) throw ValidationError("t must be positive");
  const double tail = spec.tail_sum(k);
  const double mass = lambda + tail;
  if (!(mass > 0.0)) throw DomainError("lambda + tail sum <= 0: bound undefined");
  const double nn = static_cast<double>(n);
  UpperBounds out;
  out.bias = calibration_c * square(square(L)) *
             (tail_energy(spec, sig, k) +
              head_inverse_energy(spec, sig, k) * square(mass / nn));
  out.variance = calibration_c * square(sigma_eps) * t * square(L) *
                 (static_cast<double>(k) / nn + nn * spec.tail_sq_sum(k) / square(mass));
  return out;
}

UpperBounds upper_bounds_general(const Spectrum& spec, const SignalSpec& sig, int n,
                                 double lambda, int k, double mu1_Ainv,
                                 double mun_Ainv, double t, double sigma_eps,
                                 double calibration_c) {
  (void)lambda;  // lambda enters only through the supplied eigenvalues of A_k^{-1}
  check_upper_preconditions(spec, sig, n, k);
  if (!(mun_Ainv > 0.0) || mu1_Ainv < mun_Ainv) {
    throw DomainError("need mu1(A_k^{-1}) >= mun(A_k^{-1}) > 0");
  }
  if (!(t > 0.0)) throw ValidationError("t must be positive");
  const double nn = static_cast<double>(n);
  const double tail_sq = spec.tail_sq_sum(k);
  const double lam_next = spec[k];
  const double ratio_sq = square(mu1_Ainv / mun_Ainv);
  UpperBounds out;
  out.bias = calibration_c *
             (tail_energy(spec, sig, k) *
                  (1.0 + ratio_sq +
                   square(mu1_Ainv) * (nn * nn * square(lam_next) + nn * tail_sq)) +
              head_inverse_energy(spec, sig, k) *
                  (1.0 / (nn * nn * square(mun_Ainv)) +
                   ratio_sq * (square(lam_next) + tail_sq / nn)));
  out.variance = calibration_c * square(sigma_eps) * t *
                 (ratio_sq * static_cast<double>(k) / nn +
                  nn * square(mu1_Ainv) * tail_sq);
  return out;
}

double lower_bound_variance(const Spectrum& spec, int n, double lambda, int k,
                            double sigma_x, double calibration_c) {
  if (lambda < 0.0) {
    throw DomainError(
        "variance lower bound requires lambda >= 0 (independent-coordinate "
        "hypothesis of the sign-flip argument)");
  }
  const EffectiveRanks er = effective_ranks(spec, lambda, n, k);
  const double denom = square(square(sigma_x)) * square(spec[k]) * square(er.rho_k + 2.0);
  double sum = 0.0;
  for (int i = 0; i < spec.dim(); ++i) {
    sum += std::min(1.0, square(spec[i]) / denom);
  }
  return calibration_c * sum / static_cast<double>(n);
}

double lower_bound_bias(const Spectrum& spec, const std::vector<double>& theta_bar,
                        double lambda, int n, int k, double L) {
  if (lambda < 0.0) throw DomainError("bias lower bound requires lambda >= 0");
  if (!(L >= 1.0)) throw ValidationError("L must be >= 1");
  if (static_cast<int>(theta_bar.size()) != spec.dim()) {
    throw ValidationError("theta_bar length does not match spectrum dimension");
  }
  const EffectiveRanks er = effective_ranks(spec, lambda, n, k);
  const double scale = 2.0 * L * spec[k] * er.rho_k;
  double sum = 0.0;
  for (int i = 0; i < spec.dim(); ++i) {
    const double th = theta_bar[static_cast<size_t>(i)];
    sum += spec[i] * th * th / square(1.0 + spec[i] / scale);
  }
  return 0.5 * sum;
}

MatchedBounds matched_bounds(const Spectrum& spec, const SignalSpec& sig, int n,
                             double lambda, int k) {
  check_signal(spec, sig);
  const EffectiveRanks er = effective_ranks(spec, lambda, n, k);
  const double nn = static_cast<double>(n);
  const double mass = lambda + er.tail_sum;
  const double rho_scale = spec[k] * er.rho_k;  // = mass / n
  MatchedBounds out;
  for (int i = 0; i < spec.dim(); ++i) {
    const double th_sq = square(sig.theta[static_cast<size_t>(i)]);
    out.B_under += spec[i] * th_sq / square(1.0 + spec[i] / rho_scale);
    out.V_under += std::min(1.0, square(spec[i]) / (square(spec[k]) * square(er.rho_k + 2.0)));
  }
  out.V_under /= nn;
  out.B_over = tail_energy(spec, sig, k) +
               head_inverse_energy(spec, sig, k) * square(mass / nn);
  out.V_over = static_cast<double>(k) / nn + nn * er.tail_sq_sum / square(mass);
  return out;
}

RatioCaps ratio_caps_interval(double rho_k, double a, double b) {
  if (!(0.0 < a && a < rho_k && rho_k < b)) {
    throw DomainError("ratio caps (interval mode) require 0 < a < rho_k < b");
  }
  return {std::max(square(1.0 + b), square(1.0 + 1.0 / a)),
          std::max(square(2.0 + b), square(1.0 + 2.0 / a))};
}

RatioCaps ratio_caps_kstar(double rho_k, double b, int n) {
  if (!(b > 1.0 / static_cast<double>(n))) {
    throw DomainError("ratio caps (k* mode) require b > 1/n");
  }
  if (!(rho_k > b)) {
    throw DomainError("ratio caps (k* mode) require rho_k > b at the selected k");
  }
  return {std::max(square(1.0 + b), square(1.0 + 1.0 / b)),
          std::max(square(2.0 + b), square(1.0 + 2.0 / b))};
}

ComponentwiseBounds componentwise_bounds(const Spectrum& spec, const SignalSpec& sig,
                                         int n, double lambda, int k) {
  check_signal(spec, sig);
  const EffectiveRanks er = effective_ranks(spec, lambda, n, k);
  const double w = square(er.rho_k * spec[k]);
  ComponentwiseBounds out;
  out.bias.resize(static_cast<size_t>(spec.dim()));
  out.variance.resize(static_cast<size_t>(spec.dim()));
  for (int i = 0; i < spec.dim(); ++i) {
    const double lam_sq = square(spec[i]);
    const double mix = w + lam_sq;
    out.bias[static_cast<size_t>(i)] =
        spec[i] * square(sig.theta[static_cast<size_t>(i)]) * w / mix;
    out.variance[static_cast<size_t>(i)] = lam_sq / (mix * static_cast<double>(n));
  }
  return out;
}

std::string to_string(EnvelopeContext context) {
  switch (context) {
    case EnvelopeContext::a_k:
      return "A_k envelope";
    case EnvelopeContext::a_0:
      return "A_0 envelope";
    case EnvelopeContext::rho_lower:
      return "rho lower bound";
  }
  return "unknown";
}

EigEnvelope eigenvalue_envelope_Ak(const Spectrum& spec, double lambda, int k, int n,
                                   double t, double sigma_x,
                                   std::optional<double> small_ball_L,
                                   double calibration_c) {
  if (!(t >= 0.0)) throw ValidationError("t must be non-negative");
  if (k < 0 || k > spec.dim()) throw ValidationError("k must lie in [0, p]");
  const double lam_next = k < spec.dim() ? spec[k] : 0.0;
  const double tail = k < spec.dim() ? spec.tail_sum(k) : 0.0;
  const double tail_sq = k < spec.dim() ? spec.tail_sq_sum(k) : 0.0;
  const double tn = t + static_cast<double>(n);
  EigEnvelope env;
  env.context = EnvelopeContext::a_k;
  env.mu_max_pred =
      lambda + calibration_c * square(sigma_x) * (lam_next * tn + tail);
  if (small_ball_L) {
    if (!(*small_ball_L >= 1.0)) throw ValidationError("small-ball L must be >= 1");
    env.mu_min_pred = lambda + tail / *small_ball_L -
                      calibration_c * square(sigma_x) *
                          std::sqrt(tn * (square(lam_next) * tn + tail_sq));
  } else {
    env.mu_min_pred = lambda;  // mu_min(A_k) >= lambda always
  }
  return env;
}

EigEnvelope envelope_A0_from_Ak(const Spectrum& spec, double lambda, int n, double t,
                                double sigma_x, double L, double K,
                                double calibration_c) {
  if (!(K > 1.0)) throw DomainError("A_0 envelope requires K > 1");
  if (!(L >= 1.0)) throw ValidationError("L must be >= 1");
  if (!(t >= 0.0 && t < static_cast<double>(n))) {
    throw ValidationError("t must lie in [0, n)");
  }
  const double mass = lambda + spec.total_sum();
  if (mass < K * static_cast<double>(n) * spec[0]) {
    throw DomainError("A_0 envelope requires lambda + sum lambda_i >= K * n * lambda_1");
  }
  EigEnvelope env;
  env.context = EnvelopeContext::a_0;
  const double nn = static_cast<double>(n);
  env.mu_min_pred = (1.0 - t * square(sigma_x) / nn) * (K - 1.0) / (L * K) * mass;
  env.mu_max_pred = calibration_c * square(sigma_x) * (K + 2.0) / K * mass;
  return env;
}

double rho_k_floor(double L, double calibration_c) {
  if (!(L >= 1.0)) throw ValidationError("L must be >= 1");
  return 1.0 / (calibration_c * L);
}

RegimeBounds regime_bounds(const Spectrum& spec, const SignalSpec& sig, int n,
                           const Regime& regime, double t, double sigma_eps,
                           double sigma_x) {
  (void)sigma_x;  // regime displays are constant-free cores; sigma_x only gates
                  // the hidden constants, which are pinned to 1 here
  check_signal(spec, sig);
  if (!(t > 0.0)) throw ValidationError("t must be positive");
  const double nn = static_cast<double>(n);
  RegimeBounds out;

  if (const auto* r = std::get_if<LargeLambdaRegime>(&regime)) {
    const int k = r->k;
    if (k < 1 || k >= std::min(n, spec.dim())) {
      throw ValidationError("large-lambda regime needs 1 <= k < min(n, p)");
    }
    const double tail = spec.tail_sum(k);
    out.lambda_used = nn * spec[k];
    out.hypothesis_ok = nn * spec[k] >= tail;
    out.form = "large_lambda";
    out.bias_upper = tail_energy(spec, sig, k) +
                     square(spec[k - 1]) * head_inverse_energy(spec, sig, k);
    out.variance_upper = square(sigma_eps) * t *
                         (static_cast<double>(k) / nn +
                          spec.tail_sq_sum(k) / (nn * square(spec[k - 1])));
    return out;
  }

  if (const auto* r = std::get_if<ZeroLambdaRegime>(&regime)) {
    const int k = r->k;
    if (k < 0 || k >= std::min(n, spec.dim())) {
      throw ValidationError("zero-lambda regime needs 0 <= k < min(n, p)");
    }
    const double tail = spec.tail_sum(k);
    if (!(r->lambda >= 0.0 && r->lambda < tail)) {
      throw DomainError("zero-lambda regime needs lambda in [0, tail_sum)");
    }
    out.lambda_used = r->lambda;
    out.hypothesis_ok = tail >= nn * spec[k];
    out.form = "zero_lambda";
    out.bias_upper = tail_energy(spec, sig, k) +
                     head_inverse_energy(spec, sig, k) * square(tail / nn);
    out.variance_upper =
        square(sigma_eps) * t *
        (static_cast<double>(k) / nn + nn * spec.tail_sq_sum(k) / square(tail));
    return out;
  }

  const auto& r = std::get<NegativeLambdaRegime>(regime);
  const int k = r.k;
  if (k < 0 || k >= std::min(n, spec.dim())) {
    throw ValidationError("negative-lambda regime needs 0 <= k < min(n, p)");
  }
  const double tail = spec.tail_sum(k);
  const double tail_sq = spec.tail_sq_sum(k);
  const double p = static_cast<double>(spec.dim());
  if (spec.tail_is_plateau(k)) {
    out.lambda_used = -tail + r.xi * spec[k] * std::sqrt(nn * p);
    out.form = "plateau_tail";
  } else {
    out.lambda_used = -tail + r.xi * (nn * spec[0] + std::sqrt(nn * tail_sq));
    out.form = "general_tail";
  }
  if (!(out.lambda_used + tail > 0.0)) {
    throw DomainError("negative-lambda regime: xi leaves lambda + tail_sum <= 0");
  }
  out.hypothesis_ok = tail >= nn * spec[k];
  const double mix = nn * square(spec[k]) + tail_sq;
  out.bias_upper = tail_energy(spec, sig, k) +
                   head_inverse_energy(spec, sig, k) * square(r.xi) / nn * mix;
  out.variance_upper = square(sigma_eps) * t *
                       (static_cast<double>(k) / nn + tail_sq / (square(r.xi) * mix));
  return out;
}

BoundReport make_bound_report(const Spectrum& spec, const SignalSpec& sig, int n,
                              double lambda, int k, const BoundConstants& constants,
                              const std::optional<CapMode>& cap_mode) {
  BoundReport report;
  report.lambda = lambda;
  report.k = k;
  report.effective = effective_ranks(spec, lambda, n, k);
  const UpperBounds upper =
      upper_bounds_conditioned(spec, sig, n, lambda, k, constants.L, constants.t,
                               constants.sigma_eps, constants.calibration_c);
  report.B_upper = upper.bias;
  report.V_upper = upper.variance;
  const MatchedBounds matched = matched_bounds(spec, sig, n, lambda, k);
  report.B_lower = matched.B_under;
  report.V_lower = matched.V_under;
  report.constants = constants;
  if (cap_mode) {
    RatioCaps caps{};
    if (const auto* interval = std::get_if<CapInterval>(&*cap_mode)) {
      caps = ratio_caps_interval(report.effective.rho_k, interval->a, interval->b);
    } else {
      caps = ratio_caps_kstar(report.effective.rho_k, std::get<CapKStar>(*cap_mode).b, n);
    }
    report.B_ratio_cap = caps.B_cap;
    report.V_ratio_cap = caps.V_cap;
  }
  return report;
}

}  // namespace ridgebounds
