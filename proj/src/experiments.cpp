#include "ridgebounds/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

#include "ridgebounds/errors.hpp"
#include "ridgebounds/rng.hpp"

namespace ridgebounds {

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (sorted.size() == 1) return sorted.front();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

SignalSpec ExperimentConfig::resolve_signal(const Spectrum& spec) const {
  if (const auto* e = std::get_if<ExplicitSignal>(&signal)) {
    SignalSpec sig{e->values};
    check_signal(spec, sig);
    return sig;
  }
  if (const auto* s = std::get_if<UnitEnergyOnSpikes>(&signal)) {
    if (s->k_spikes < 1 || s->k_spikes > spec.dim()) {
      throw ValidationError("signal: k_spikes must lie in [1, p]");
    }
    if (!(s->snr > 0.0) || !(sigma_eps > 0.0)) {
      throw ValidationError("signal: unit-energy-on-spikes needs snr > 0 and sigma_eps > 0");
    }
    const double head_sum = spec.total_sum() - spec.tail_sum(s->k_spikes);
    const double coeff = sigma_eps * std::sqrt(s->snr / head_sum);
    SignalSpec sig;
    sig.theta.assign(static_cast<size_t>(spec.dim()), 0.0);
    std::fill(sig.theta.begin(), sig.theta.begin() + s->k_spikes, coeff);
    return sig;
  }
  const auto& a = std::get<AlignedDecay>(signal);
  SignalSpec sig;
  sig.theta.assign(static_cast<size_t>(spec.dim()), a.scale);
  return sig;
}

int ExperimentConfig::resolve_k(const Spectrum& spec, double lambda) const {
  if (const auto* f = std::get_if<FixedK>(&k_policy)) return f->k;
  const auto& ks = std::get<KStarPolicy>(k_policy);
  return select_k_star(spec, lambda, n, ks.b).value_or(0);
}

void ExperimentConfig::validate() const {
  if (n < 1) throw ValidationError("config: n must be >= 1");
  if (lambda_grid.empty()) throw ValidationError("config: lambda_grid must be non-empty");
  if (replicates < 1) throw ValidationError("config: replicates must be >= 1");
  if (sigma_eps < 0.0) throw ValidationError("config: sigma_eps must be >= 0");
  const Spectrum spec = spectrum();
  (void)resolve_signal(spec);
  if (const auto* f = std::get_if<FixedK>(&k_policy)) {
    if (f->k < 0 || f->k >= std::min(n, spec.dim())) {
      throw ValidationError("config: fixed k must lie in [0, min(n, p))");
    }
  } else if (!(std::get<KStarPolicy>(k_policy).b > 0.0)) {
    throw ValidationError("config: k* threshold b must be positive");
  }
  if (ratio_interval && !(ratio_interval->a > 0.0 && ratio_interval->a < ratio_interval->b)) {
    throw ValidationError("config: ratio_interval needs 0 < a < b");
  }
}

std::vector<ReplicateRow> run_replicate(const ExperimentConfig& config,
                                        int replicate_index) {
  const Spectrum spec = config.spectrum();
  const SignalSpec sig = config.resolve_signal(spec);
  const std::uint64_t seed = rng::derive_stream(
      config.base_seed, static_cast<std::uint64_t>(replicate_index), rng::kDesignStream);
  const Eigen::MatrixXd X = sample_design(config.family, spec, config.n, seed);
  std::vector<ReplicateRow> rows;
  rows.reserve(config.lambda_grid.size());
  // One evaluator per resolved k so the tail eigendecomposition is shared
  // across the grid points that agree on k.
  std::map<int, RiskEvaluator> evaluators;
  for (double lambda : config.lambda_grid) {
    const int k = config.resolve_k(spec, lambda);
    auto it = evaluators.find(k);
    if (it == evaluators.end()) {
      it = evaluators.emplace(k, RiskEvaluator(X, spec, sig, config.sigma_eps, k)).first;
    }
    const RiskPoint pt = it->second.evaluate(lambda);
    ReplicateRow row;
    row.replicate = replicate_index;
    row.lambda = lambda;
    row.pd = pt.pd;
    row.pd_margin = pt.pd_margin;
    row.bias = pt.bias;
    row.variance_expected = pt.variance_expected;
    row.mse = pt.mse;
    row.cond_Ak = pt.cond_Ak;
    row.mu_max_Ak = pt.mu_max_Ak;
    row.mu_min_Ak = pt.mu_min_Ak;
    rows.push_back(row);
  }
  return rows;
}

SweepResult run_sweep(const ExperimentConfig& config, int threads) {
  config.validate();
  const Spectrum spec = config.spectrum();
  const SignalSpec sig = config.resolve_signal(spec);
  const int replicates = config.replicates;
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
  }
  threads = std::min(threads, replicates);

  std::vector<std::vector<ReplicateRow>> by_replicate(static_cast<size_t>(replicates));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= replicates) return;
      try {
        by_replicate[static_cast<size_t>(r)] = run_replicate(config, r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  SweepResult result;
  result.rows.reserve(config.lambda_grid.size() * static_cast<size_t>(replicates));
  for (size_t li = 0; li < config.lambda_grid.size(); ++li) {
    for (int r = 0; r < replicates; ++r) {
      result.rows.push_back(by_replicate[static_cast<size_t>(r)][li]);
    }
  }

  result.per_lambda.reserve(config.lambda_grid.size());
  for (size_t li = 0; li < config.lambda_grid.size(); ++li) {
    LambdaAggregate agg;
    agg.lambda = config.lambda_grid[li];
    std::vector<double> mses;
    double sum_bias = 0.0;
    double sum_var = 0.0;
    for (int r = 0; r < replicates; ++r) {
      const ReplicateRow& row = by_replicate[static_cast<size_t>(r)][li];
      if (!row.pd) continue;
      mses.push_back(row.mse);
      sum_bias += row.bias;
      sum_var += row.variance_expected;
    }
    agg.replicates_pd = static_cast<int>(mses.size());
    agg.available = !mses.empty();
    if (agg.available) {
      const double m = static_cast<double>(mses.size());
      double mean = 0.0;
      for (double v : mses) mean += v;
      mean /= m;
      double ss = 0.0;
      for (double v : mses) ss += (v - mean) * (v - mean);
      agg.mean_mse = mean;
      agg.se_mean_mse = mses.size() > 1 ? std::sqrt(ss / (m - 1.0) / m) : 0.0;
      std::sort(mses.begin(), mses.end());
      agg.median_mse = quantile_sorted(mses, 0.5);
      agg.q10_mse = quantile_sorted(mses, 0.1);
      agg.q90_mse = quantile_sorted(mses, 0.9);
      agg.mean_bias = sum_bias / m;
      agg.mean_variance = sum_var / m;
    }
    result.per_lambda.push_back(agg);
  }

  // Grid argmin of the mean MSE, with its stability margin in combined
  // standard errors against the runner-up.
  const LambdaAggregate* best = nullptr;
  const LambdaAggregate* second = nullptr;
  for (const auto& agg : result.per_lambda) {
    if (!agg.available) continue;
    if (!best || agg.mean_mse < best->mean_mse) {
      second = best;
      best = &agg;
    } else if (!second || agg.mean_mse < second->mean_mse) {
      second = &agg;
    }
  }
  if (best) {
    result.lambda_opt = best->lambda;
    if (second) {
      const double combined =
          std::sqrt(best->se_mean_mse * best->se_mean_mse +
                    second->se_mean_mse * second->se_mean_mse);
      result.lambda_opt_margin_se =
          combined > 0.0 ? (second->mean_mse - best->mean_mse) / combined
                         : std::numeric_limits<double>::infinity();
    }
  }

  result.k_used = config.resolve_k(spec, config.lambda_grid.front());
  result.bound_overlay.reserve(config.lambda_grid.size());
  for (double lambda : config.lambda_grid) {
    std::optional<BoundReport> report;
    try {
      const int k = config.resolve_k(spec, lambda);
      std::optional<CapMode> cap_mode;
      if (const auto* ks = std::get_if<KStarPolicy>(&config.k_policy)) {
        cap_mode = CapKStar{ks->b};
      } else if (config.ratio_interval) {
        cap_mode = *config.ratio_interval;
      }
      report = make_bound_report(spec, sig, config.n, lambda, k, config.constants,
                                 cap_mode);
    } catch (const DomainError&) {
    } catch (const ValidationError&) {
    }
    result.bound_overlay.push_back(std::move(report));
  }
  return result;
}

namespace {

double ratio_with_convention(double numerator, double denominator) {
  if (denominator == 0.0) {
    return numerator == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  }
  return numerator / denominator;
}

}  // namespace

std::vector<BoundComparisonRow> compare_bounds(const SweepResult& sweep) {
  std::vector<BoundComparisonRow> rows;
  for (size_t li = 0; li < sweep.per_lambda.size(); ++li) {
    const LambdaAggregate& agg = sweep.per_lambda[li];
    if (!agg.available || li >= sweep.bound_overlay.size() || !sweep.bound_overlay[li]) {
      continue;
    }
    const BoundReport& report = *sweep.bound_overlay[li];
    // The matched under-forms are stated for unit-variance noise; the
    // empirical variance carries sigma_eps^2, so the lower side is rescaled
    // before taking ratios.
    const double noise_sq = report.constants.sigma_eps * report.constants.sigma_eps;
    BoundComparisonRow row;
    row.lambda = agg.lambda;
    row.bias_over_upper = ratio_with_convention(agg.mean_bias, report.B_upper);
    row.variance_over_upper = ratio_with_convention(agg.mean_variance, report.V_upper);
    row.lower_over_bias = ratio_with_convention(report.B_lower, agg.mean_bias);
    row.lower_over_variance =
        ratio_with_convention(noise_sq * report.V_lower, agg.mean_variance);
    rows.push_back(row);
  }
  return rows;
}

ExperimentConfig preset_exponential_decay(double gamma, int n, int replicates) {
  if (!(gamma > 0.0)) throw ValidationError("preset: gamma must be positive");
  if (n < 1) throw ValidationError("preset: n must be >= 1");
  ExperimentConfig config;
  // Truncate where lambda_i < 1e-16 * lambda_1.
  const int p = std::max(1, static_cast<int>(std::floor(1.0 + 16.0 * std::log(10.0) / gamma)));
  config.spectrum_model = ExponentialModel{gamma};
  config.p = p;
  config.n = n;
  config.family = DesignFamily::gaussian;
  config.signal = AlignedDecay{1.0};
  config.sigma_eps = 1.0;
  int k = static_cast<int>(std::llround(std::pow(static_cast<double>(n), 2.0 / 3.0)));
  k = std::max(0, std::min(k, std::min(n, p) - 1));
  config.k_policy = FixedK{k};
  const double center = static_cast<double>(n) * std::exp(-gamma * static_cast<double>(k + 1));
  config.lambda_grid.clear();
  for (int i = -6; i <= 6; ++i) {
    config.lambda_grid.push_back(center * std::pow(10.0, static_cast<double>(i) / 3.0));
  }
  config.replicates = replicates;
  config.base_seed = 0xC0FFEEULL;
  return config;
}

ExperimentConfig preset_spiked_negative(int k_spikes, int p, double lambda_top,
                                          double lambda_tail, int n, double snr,
                                          int replicates) {
  if (!(k_spikes >= 1 && k_spikes < n && p > n)) {
    throw ValidationError("preset: need 1 <= k_spikes < n < p");
  }
  ExperimentConfig config;
  config.spectrum_model = SpikedModel{k_spikes, lambda_top, lambda_tail};
  config.p = p;
  config.n = n;
  config.family = DesignFamily::gaussian;
  config.signal = UnitEnergyOnSpikes{k_spikes, snr};
  config.sigma_eps = 1.0;
  config.k_policy = FixedK{k_spikes};
  config.replicates = replicates;
  config.base_seed = 0x5EEDULL;

  const double tail = lambda_tail * static_cast<double>(p - k_spikes);
  const double step = lambda_tail * std::sqrt(static_cast<double>(n) * static_cast<double>(p));
  std::set<double> grid;
  grid.insert(0.0);
  std::vector<double> xis = {1.5, 2.0, 2.25, 2.5, 2.75, 3.0, 3.5, 4.0, 5.0, 6.0, 8.0, 10.0};
  xis.push_back(std::sqrt(static_cast<double>(p) / static_cast<double>(n)));
  xis.push_back(std::sqrt(static_cast<double>(n) / static_cast<double>(k_spikes)));
  for (double xi : xis) grid.insert(-tail + xi * step);
  config.lambda_grid.assign(grid.begin(), grid.end());
  return config;
}

namespace {

AuditStat make_stat(const std::string& name, std::uint64_t seed, double scale,
                    std::vector<double> constants, double mean, double hits) {
  AuditStat stat;
  stat.name = name;
  stat.samples = static_cast<int>(constants.size());
  stat.seed = seed;
  stat.scale = scale;
  stat.mean = mean;
  stat.hit_fraction = hits;
  if (!constants.empty()) {
    std::sort(constants.begin(), constants.end());
    stat.quantiles["q50"] = quantile_sorted(constants, 0.5);
    stat.quantiles["q90"] = quantile_sorted(constants, 0.9);
    stat.quantiles["q99"] = quantile_sorted(constants, 0.99);
  }
  return stat;
}

}  // namespace

const AuditStat* AuditReport::find(const std::string& name) const {
  for (const auto& stat : stats) {
    if (stat.name == name) return &stat;
  }
  return nullptr;
}

AuditReport concentration_audit(const Spectrum& spec, DesignFamily family, int n,
                                int k, double lambda, int samples,
                                std::uint64_t seed) {
  if (samples < 100) throw ValidationError("concentration_audit: samples must be >= 100");
  if (k < 0 || k >= spec.dim()) throw ValidationError("concentration_audit: bad k");
  const int p = spec.dim();
  const double sigma_x = 1.0;
  const double t = 1.0;
  const double tail = spec.tail_sum(k);
  const double tail_sq = spec.tail_sq_sum(k);
  const double lam_next = spec[k];
  const double tn = t + static_cast<double>(n);
  const double total = spec.total_sum();
  const double K_ratio = (lambda + total) / (static_cast<double>(n) * spec[0]);

  const double weighted_scale = sigma_x * sigma_x * (t * lam_next + tail);
  const double sum_scale = static_cast<double>(n) * tail;
  const double offdiag_scale =
      sigma_x * sigma_x * std::sqrt(tn * (lam_next * lam_next * tn + tail_sq));
  const EigEnvelope ak_env =
      eigenvalue_envelope_Ak(spec, lambda, k, n, t, sigma_x, 1.0, 1.0);

  std::vector<double> sum_consts, row_consts, hw_id, hw_gram, offdiag_consts;
  std::vector<double> ak_upper_consts, ak_lower_consts, a0_upper_consts;
  double sum_mean = 0.0, row_mean = 0.0, hw_id_mean = 0.0, hw_gram_mean = 0.0;
  double offdiag_mean = 0.0, ak_up_mean = 0.0, ak_low_mean = 0.0, a0_mean = 0.0;
  int ak_hits = 0;
  int a0_hits = 0;

  std::optional<EigEnvelope> a0_env;
  if (K_ratio > 1.0) {
    a0_env = envelope_A0_from_Ak(spec, lambda, n, t, sigma_x, 1.0, K_ratio, 1.0);
  }

  for (int s = 0; s < samples; ++s) {
    const std::uint64_t design_seed =
        rng::derive_stream(seed, static_cast<std::uint64_t>(s), rng::kAuditStream);
    const std::uint64_t noise_seed =
        rng::derive_stream(seed, static_cast<std::uint64_t>(s), rng::kNoiseStream);
    const Eigen::MatrixXd X = sample_design(family, spec, n, design_seed);
    const Eigen::MatrixXd X_tail = X.rightCols(p - k);

    double frob_sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double rn = X_tail.row(i).squaredNorm();
      frob_sq += rn;
      row_consts.push_back(rn / weighted_scale);
      row_mean += rn;
    }
    sum_consts.push_back(std::abs(frob_sq - sum_scale) / (sigma_x * sigma_x * tail));
    sum_mean += frob_sq;

    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
    G.selfadjointView<Eigen::Lower>().rankUpdate(X_tail);
    G = G.selfadjointView<Eigen::Lower>();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
    const double mu_max = lambda + es.eigenvalues().maxCoeff();
    const double mu_min = lambda + es.eigenvalues().minCoeff();
    const double up_const = (mu_max - lambda) / (sigma_x * sigma_x * (lam_next * tn + tail));
    const double low_const = (lambda + tail - mu_min) / offdiag_scale;
    ak_upper_consts.push_back(up_const);
    ak_lower_consts.push_back(low_const);
    ak_up_mean += mu_max;
    ak_low_mean += mu_min;
    if (mu_max <= ak_env.mu_max_pred && mu_min >= ak_env.mu_min_pred) ++ak_hits;

    Eigen::MatrixXd off = G;
    off.diagonal().setZero();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_off(off, Eigen::EigenvaluesOnly);
    const double off_norm = std::max(std::abs(es_off.eigenvalues().maxCoeff()),
                                     std::abs(es_off.eigenvalues().minCoeff()));
    offdiag_consts.push_back(off_norm / offdiag_scale);
    offdiag_mean += off_norm;

    const Eigen::VectorXd eps = sample_noise(n, 1.0, noise_seed);
    hw_id.push_back(eps.squaredNorm() / static_cast<double>(n));
    hw_id_mean += hw_id.back();
    // Quadratic form in the doubly weighted tail Gram, the matrix shape the
    // variance bound actually meets.
    Eigen::MatrixXd Xs = X_tail;
    for (int j = 0; j < p - k; ++j) Xs.col(j) *= std::sqrt(spec[k + j]);
    const Eigen::VectorXd u = Xs.transpose() * eps;
    const double tr_w = Xs.squaredNorm();
    hw_gram.push_back(tr_w > 0.0 ? u.squaredNorm() / tr_w : 1.0);
    hw_gram_mean += hw_gram.back();

    if (a0_env) {
      double a0_max = mu_max;
      double a0_min = mu_min;
      if (k > 0) {
        Eigen::MatrixXd G0 = Eigen::MatrixXd::Zero(n, n);
        G0.selfadjointView<Eigen::Lower>().rankUpdate(X);
        G0 = G0.selfadjointView<Eigen::Lower>();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es0(G0, Eigen::EigenvaluesOnly);
        a0_max = lambda + es0.eigenvalues().maxCoeff();
        a0_min = lambda + es0.eigenvalues().minCoeff();
      }
      a0_upper_consts.push_back(a0_max /
                                (sigma_x * sigma_x * (K_ratio + 2.0) / K_ratio * (lambda + total)));
      a0_mean += a0_max;
      if (a0_max <= a0_env->mu_max_pred && a0_min >= a0_env->mu_min_pred) ++a0_hits;
    }
  }

  const double ns = static_cast<double>(samples);
  AuditReport report;
  report.stats.push_back(make_stat("sum_sq_norms", seed, sum_scale,
                                   std::move(sum_consts), sum_mean / ns, 1.0));
  report.stats.push_back(make_stat("weighted_norm", seed, weighted_scale,
                                   std::move(row_consts),
                                   row_mean / (ns * static_cast<double>(n)), 1.0));
  report.stats.push_back(make_stat("hanson_wright_identity", seed,
                                   static_cast<double>(n), std::move(hw_id),
                                   hw_id_mean / ns, 1.0));
  report.stats.push_back(make_stat("hanson_wright_gram", seed, 1.0,
                                   std::move(hw_gram), hw_gram_mean / ns, 1.0));
  report.stats.push_back(make_stat("offdiag_gram", seed, offdiag_scale,
                                   std::move(offdiag_consts), offdiag_mean / ns, 1.0));
  report.stats.push_back(make_stat("envelope_Ak_upper", seed, ak_env.mu_max_pred,
                                   std::move(ak_upper_consts), ak_up_mean / ns,
                                   static_cast<double>(ak_hits) / ns));
  report.stats.push_back(make_stat("envelope_Ak_lower", seed, ak_env.mu_min_pred,
                                   std::move(ak_lower_consts), ak_low_mean / ns,
                                   static_cast<double>(ak_hits) / ns));
  if (a0_env) {
    report.stats.push_back(make_stat("envelope_A0", seed, a0_env->mu_max_pred,
                                     std::move(a0_upper_consts), a0_mean / ns,
                                     static_cast<double>(a0_hits) / ns));
  }
  return report;
}

}  // namespace ridgebounds
