#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "ridgebounds/errors.hpp"
#include "ridgebounds/experiments.hpp"
#include "ridgebounds/io.hpp"

using namespace ridgebounds;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig config;
  config.spectrum_model = SpikedModel{2, 20.0, 1.0};
  config.p = 120;
  config.n = 16;
  config.family = DesignFamily::gaussian;
  config.signal = UnitEnergyOnSpikes{2, 4.0};
  config.sigma_eps = 1.0;
  config.lambda_grid = {-200.0, 0.0, 1.0, 25.0};
  config.replicates = 6;
  config.base_seed = 42;
  config.k_policy = FixedK{2};
  return config;
}

}  // namespace

TEST_CASE("run_replicate is deterministic and isolates non-PD grid points") {
  const ExperimentConfig config = tiny_config();
  const auto rows_a = run_replicate(config, 3);
  const auto rows_b = run_replicate(config, 3);
  REQUIRE(rows_a.size() == config.lambda_grid.size());
  for (size_t i = 0; i < rows_a.size(); ++i) {
    CHECK(rows_a[i].lambda == rows_b[i].lambda);
    CHECK(std::memcmp(&rows_a[i].mse, &rows_b[i].mse, sizeof(double)) == 0);
    CHECK(rows_a[i].pd_margin == rows_b[i].pd_margin);
  }
  // lambda = -200 dives far past the PD boundary on this spectrum (tail Gram
  // has roughly p - k eigenvalue mass over n slots ~ 120) -> flagged.
  CHECK_FALSE(rows_a[0].pd);
  CHECK(std::isnan(rows_a[0].mse));
  CHECK(rows_a[1].pd);
  CHECK(rows_a[1].mse == doctest::Approx(rows_a[1].bias + rows_a[1].variance_expected));
  // Shrinkage: bias at the largest lambda >= bias at lambda = 0.
  CHECK(rows_a[3].bias >= rows_a[1].bias);
}

TEST_CASE("run_sweep aggregates, determinism across thread counts") {
  const ExperimentConfig config = tiny_config();
  const SweepResult one = run_sweep(config, 1);
  const SweepResult many = run_sweep(config, 4);
  REQUIRE(one.rows.size() == many.rows.size());
  for (size_t i = 0; i < one.rows.size(); ++i) {
    CHECK(one.rows[i].lambda == many.rows[i].lambda);
    CHECK(one.rows[i].replicate == many.rows[i].replicate);
    // bitwise agreement, NaN-safe
    CHECK(std::memcmp(&one.rows[i].mse, &many.rows[i].mse, sizeof(double)) == 0);
  }
  CHECK(io::sweep_csv(one) == io::sweep_csv(many));
  REQUIRE(one.per_lambda.size() == 4);
  CHECK_FALSE(one.per_lambda[0].available);  // all replicates non-PD at -200
  CHECK(one.per_lambda[1].replicates_pd == 6);
  CHECK(one.lambda_opt.has_value());

  // Aggregates recomputable from rows.
  double mean = 0.0;
  int count = 0;
  for (const auto& row : one.rows) {
    if (row.lambda == 1.0 && row.pd) {
      mean += row.mse;
      ++count;
    }
  }
  mean /= count;
  CHECK(one.per_lambda[2].mean_mse == doctest::Approx(mean).epsilon(1e-13));
}

TEST_CASE("single replicate aggregates equal the row") {
  ExperimentConfig config = tiny_config();
  config.replicates = 1;
  config.lambda_grid = {0.5};
  const SweepResult sweep = run_sweep(config, 1);
  REQUIRE(sweep.rows.size() == 1);
  CHECK(sweep.per_lambda[0].mean_mse == sweep.rows[0].mse);
  CHECK(sweep.per_lambda[0].median_mse == sweep.rows[0].mse);
  CHECK(sweep.per_lambda[0].q10_mse == sweep.rows[0].mse);
  CHECK(sweep.lambda_opt == 0.5);
}

TEST_CASE("bound overlay and comparison table conventions") {
  ExperimentConfig config = tiny_config();
  config.lambda_grid = {0.0, 10.0};
  SUBCASE("zero signal gives bias ratio 1 by the 0/0 convention") {
    config.signal = ExplicitSignal{std::vector<double>(120, 0.0)};
    const SweepResult sweep = run_sweep(config, 1);
    const auto table = compare_bounds(sweep);
    REQUIRE(!table.empty());
    for (const auto& row : table) {
      CHECK(row.lower_over_bias == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
  SUBCASE("V ratios are invariant under sigma_eps scaling") {
    const SweepResult base = run_sweep(config, 1);
    ExperimentConfig loud = config;
    loud.sigma_eps = 3.0;
    loud.constants.sigma_eps = 3.0;
    loud.signal = UnitEnergyOnSpikes{2, 4.0};  // snr fixed, signal rescales too
    const SweepResult scaled = run_sweep(loud, 1);
    const auto t_base = compare_bounds(base);
    const auto t_scaled = compare_bounds(scaled);
    REQUIRE(t_base.size() == t_scaled.size());
    for (size_t i = 0; i < t_base.size(); ++i) {
      CHECK(t_scaled[i].variance_over_upper ==
            doctest::Approx(t_base[i].variance_over_upper).epsilon(1e-9));
      CHECK(t_scaled[i].lower_over_variance ==
            doctest::Approx(t_base[i].lower_over_variance).epsilon(1e-9));
    }
  }
}

TEST_CASE("exponential preset construction") {
  const ExperimentConfig config = preset_exponential_decay(0.1, 1000, 20);
  CHECK(config.p == 369);  // e^{-gamma(i-1)} >= 1e-16 up to i = 369
  const auto* fixed = std::get_if<FixedK>(&config.k_policy);
  REQUIRE(fixed != nullptr);
  CHECK(fixed->k == 100);  // round(1000^{2/3})
  const double center = 1000.0 * std::exp(-0.1 * 101.0);
  bool found = false;
  for (double lambda : config.lambda_grid) {
    if (std::abs(lambda - center) < 1e-12 * center) found = true;
  }
  CHECK(found);
  CHECK(config.lambda_grid.front() == doctest::Approx(center * 1e-2));
  CHECK(config.lambda_grid.back() == doctest::Approx(center * 1e2));
  // The spectrum delegates to the exponential generator.
  const Spectrum spec = config.spectrum();
  CHECK(spec[0] == doctest::Approx(std::exp(-0.1)));
  CHECK(spec.dim() == 369);

  // A larger gamma truncates sooner.
  CHECK(preset_exponential_decay(1.0, 100, 5).p < config.p);
}

TEST_CASE("spiked preset grid contents") {
  const int n = 50;
  const int p = 900;
  const ExperimentConfig config = preset_spiked_negative(3, p, 400.0, 1.0, n, 25.0, 7);
  CHECK(std::count(config.lambda_grid.begin(), config.lambda_grid.end(), 0.0) == 1);
  // xi = sqrt(p/n) lands at lambda = k_spikes * lambda_tail exactly:
  // -(p-k) + sqrt(p/n) * sqrt(n p) = k.
  bool has_equivalent_point = false;
  for (double lambda : config.lambda_grid) {
    if (std::abs(lambda - 3.0) < 1e-9) has_equivalent_point = true;
  }
  CHECK(has_equivalent_point);
  // The most negative grid point sits below the PD boundary scale -(p-k).
  CHECK(config.lambda_grid.front() < 0.0);
  const SignalSpec sig = config.resolve_signal(config.spectrum());
  double energy = 0.0;
  for (int i = 0; i < 3; ++i) energy += 400.0 * sig.theta[static_cast<size_t>(i)] *
                                        sig.theta[static_cast<size_t>(i)];
  CHECK(energy == doctest::Approx(25.0));  // snr * sigma_eps^2
}

TEST_CASE("config JSON round trip reproduces the run") {
  const ExperimentConfig config = tiny_config();
  const auto j = io::config_to_json(config);
  const ExperimentConfig back = io::config_from_json(j);
  CHECK(io::config_to_json(back) == j);
  const SweepResult a = run_sweep(config, 1);
  const SweepResult b = run_sweep(back, 2);
  CHECK(io::sweep_csv(a) == io::sweep_csv(b));
}

TEST_CASE("config validation errors") {
  ExperimentConfig config = tiny_config();
  config.lambda_grid.clear();
  CHECK_THROWS_AS(config.validate(), ValidationError);
  config = tiny_config();
  config.replicates = 0;
  CHECK_THROWS_AS(config.validate(), ValidationError);
  config = tiny_config();
  config.k_policy = FixedK{16};  // k must stay below min(n, p)
  CHECK_THROWS_AS(config.validate(), ValidationError);
  config = tiny_config();
  config.signal = ExplicitSignal{{1.0, 2.0}};  // wrong length
  CHECK_THROWS_AS(config.validate(), ValidationError);
}

TEST_CASE("audit constants are invariant under spectrum rescaling") {
  std::vector<double> lam(200, 1.0);
  for (int i = 0; i < 200; ++i) lam[static_cast<size_t>(i)] = 1.0 / (1.0 + 0.02 * i);
  std::vector<double> scaled = lam;
  for (auto& v : scaled) v *= 37.5;
  const Spectrum base = Spectrum::from_values(lam);
  const Spectrum stretched = Spectrum::from_values(scaled);
  const AuditReport a =
      concentration_audit(base, DesignFamily::gaussian, 20, 2, 0.5, 100, 77);
  const AuditReport b =
      concentration_audit(stretched, DesignFamily::gaussian, 20, 2, 37.5 * 0.5, 100, 77);
  for (const char* check : {"sum_sq_norms", "weighted_norm", "offdiag_gram",
                            "envelope_Ak_upper", "envelope_Ak_lower"}) {
    const double qa = a.find(check)->quantiles.at("q90");
    const double qb = b.find(check)->quantiles.at("q90");
    CHECK(qb == doctest::Approx(qa).epsilon(1e-10));
  }
}

TEST_CASE("concentration audit sanity on a small plateau") {
  const Spectrum spec = Spectrum::from_values(std::vector<double>(300, 1.0));
  const AuditReport report =
      concentration_audit(spec, DesignFamily::gaussian, 30, 0, 0.0, 120, 2025);
  const AuditStat* sum_stat = report.find("sum_sq_norms");
  REQUIRE(sum_stat != nullptr);
  CHECK(sum_stat->samples == 120);
  // E ||X_tail||_F^2 = n * tail_sum; 3 sigma of the mean with var 2np per draw.
  const double se = std::sqrt(2.0 * 30.0 * 300.0 / 120.0);
  CHECK(std::abs(sum_stat->mean - sum_stat->scale) <= 3.0 * se);

  const AuditStat* hw = report.find("hanson_wright_identity");
  REQUIRE(hw != nullptr);
  CHECK(hw->quantiles.at("q50") == doctest::Approx(1.0).epsilon(0.2));

  // The implied constant for the top-eigenvalue envelope sits near
  // (1 + sqrt(n/p))^2 / (1 + n/p) = 1.57 on this plateau; the c = 1 envelope
  // itself need not contain the draw, which is what the constant measures.
  const AuditStat* envelope = report.find("envelope_Ak_upper");
  REQUIRE(envelope != nullptr);
  CHECK(envelope->quantiles.at("q90") > 1.0);
  CHECK(envelope->quantiles.at("q90") < 2.5);
  CHECK(envelope->hit_fraction >= 0.0);
  CHECK(envelope->hit_fraction <= 1.0);

  const AuditStat* a0 = report.find("envelope_A0");
  REQUIRE(a0 != nullptr);  // K = p/n = 10 > 1 on this plateau
  CHECK(a0->quantiles.at("q90") > 0.0);

  CHECK_THROWS_AS(concentration_audit(spec, DesignFamily::gaussian, 30, 0, 0.0, 50, 1),
                  ValidationError);
}
