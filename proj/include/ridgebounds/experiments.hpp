#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ridgebounds/bounds.hpp"
#include "ridgebounds/estimator.hpp"
#include "ridgebounds/signal.hpp"
#include "ridgebounds/spectrum.hpp"

namespace ridgebounds {

struct ExplicitSignal {
  std::vector<double> values;
};

/// theta* supported on the first k_spikes coordinates with equal energy and
/// ||theta*||^2_Sigma = snr * sigma_eps^2.
struct UnitEnergyOnSpikes {
  int k_spikes = 1;
  double snr = 1.0;
};

/// Constant coordinates in the eigenbasis: theta*_i = scale for every i, so
/// the predictable energy profile follows the spectrum decay.
struct AlignedDecay {
  double scale = 1.0;
};

using SignalDescriptor = std::variant<ExplicitSignal, UnitEnergyOnSpikes, AlignedDecay>;

struct FixedK {
  int k = 0;
};

struct KStarPolicy {
  double b = 2.0;
};

using KPolicy = std::variant<FixedK, KStarPolicy>;

struct ExperimentConfig {
  SpectrumModel spectrum_model = ExplicitModel{};
  int p = 1;
  int n = 1;
  DesignFamily family = DesignFamily::gaussian;
  SignalDescriptor signal = AlignedDecay{};
  double sigma_eps = 1.0;
  std::vector<double> lambda_grid;
  int replicates = 100;
  std::uint64_t base_seed = 1;
  KPolicy k_policy = KStarPolicy{};
  BoundConstants constants;
  std::optional<CapInterval> ratio_interval;  // caps for fixed-k reports

  Spectrum spectrum() const { return build_spectrum(spectrum_model, p); }
  SignalSpec resolve_signal(const Spectrum& spec) const;
  int resolve_k(const Spectrum& spec, double lambda) const;
  void validate() const;
};

/// One (lambda, replicate) outcome; non-PD grid points are flagged rather
/// than failing the replicate.
struct ReplicateRow {
  int replicate = 0;
  double lambda = 0.0;
  bool pd = false;
  double pd_margin = 0.0;
  double bias = 0.0;
  double variance_expected = 0.0;
  double mse = 0.0;
  double cond_Ak = 0.0;
  double mu_max_Ak = 0.0;
  double mu_min_Ak = 0.0;
};

struct LambdaAggregate {
  double lambda = 0.0;
  int replicates_pd = 0;
  bool available = false;
  double mean_mse = 0.0;
  double median_mse = 0.0;
  double q10_mse = 0.0;
  double q90_mse = 0.0;
  double se_mean_mse = 0.0;
  double mean_bias = 0.0;
  double mean_variance = 0.0;
};

struct SweepResult {
  std::vector<ReplicateRow> rows;  // ordered by (lambda index, replicate)
  std::vector<LambdaAggregate> per_lambda;
  std::optional<double> lambda_opt;
  /// Gap between the argmin mean MSE and the runner-up, in combined standard
  /// errors; small values mean the grid argmin is not yet stable.
  std::optional<double> lambda_opt_margin_se;
  int k_used = 0;
  std::vector<std::optional<BoundReport>> bound_overlay;  // one per grid point
};

std::vector<ReplicateRow> run_replicate(const ExperimentConfig& config,
                                        int replicate_index);

/// Deterministic function of the config: replicates run concurrently but the
/// reduction is keyed by replicate index, so any thread count produces the
/// same result bit for bit.
SweepResult run_sweep(const ExperimentConfig& config, int threads = 0);

struct BoundComparisonRow {
  double lambda = 0.0;
  double bias_over_upper = 0.0;
  double variance_over_upper = 0.0;
  double lower_over_bias = 0.0;
  double lower_over_variance = 0.0;
};

/// Ratios of replicate-mean empirical risk against the bound overlay, with
/// the 0/0 -> 1 convention.
std::vector<BoundComparisonRow> compare_bounds(const SweepResult& sweep);

/// Exponential-decay preset: spectrum truncated where lambda_i < 1e-16 *
/// lambda_1, k = round(n^{2/3}), lambda grid spanning four decades around
/// n * exp(-gamma (k+1)).
ExperimentConfig preset_exponential_decay(double gamma, int n,
                                               int replicates = 100);

/// Spiked preset: signal on the spikes at the requested SNR, lambda grid
/// containing 0 and the negative-regularization family
/// lambda(xi) = -lambda_tail (p - k_spikes) + xi lambda_tail sqrt(n p).
ExperimentConfig preset_spiked_negative(int k_spikes, int p, double lambda_top,
                                          double lambda_tail, int n, double snr,
                                          int replicates = 100);

struct AuditStat {
  std::string name;
  int samples = 0;
  std::uint64_t seed = 0;
  double scale = 0.0;  // the constant-free right-hand scale
  std::map<std::string, double> quantiles;  // implied constant at q50/q90/q99
  double mean = 0.0;
  double hit_fraction = 1.0;  // fraction of samples inside the predicted envelope
};

struct AuditReport {
  std::vector<AuditStat> stats;
  const AuditStat* find(const std::string& name) const;
};

/// Empirical audit of the concentration inequalities: seeded designs/noise
/// and reports the implied constants (measured LHS over the constant-free
/// scale) at quantiles {0.5, 0.9, 0.99}.
AuditReport concentration_audit(const Spectrum& spec, DesignFamily family, int n,
                                int k, double lambda, int samples,
                                std::uint64_t seed);

}  // namespace ridgebounds
