#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace ridgebounds::verify {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct SuiteResult {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;

  bool all_passed() const {
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return true;
  }
};

nlohmann::json to_json(const SuiteResult& result);

/// Dual vs primal fits on seeded instances across n in [5, 40], p in [1, 80],
/// lambda in {0.01, 0.1, 1, 10}; the max relative sup-norm deviation must be
/// <= 1e-8.
SuiteResult dual_primal(std::uint64_t seed, int samples = 200);

/// Head-block identity residual on seeded instances including negative
/// lambda with positive pd margin; relative residual <= 1e-8.
SuiteResult identity(std::uint64_t seed, int samples = 100);

/// Monte Carlo mean of the realized variance against the exact trace form,
/// within 3 standard errors.
SuiteResult variance_mc(std::uint64_t seed, int instances = 10, int draws = 100000);

/// Matched-bound ratios against the rho_k caps on random spectra/signals in
/// both interval and k* modes.
SuiteResult ratio_caps(std::uint64_t seed, int samples = 500);

/// Concentration sanity: sum-of-norms mean, chi-square-checked
/// quadratic form quantile, off-diagonal Gram constant stability across n.
SuiteResult concentration(std::uint64_t seed, int samples = 200);

SuiteResult run_suite(const std::string& name, std::uint64_t seed, int samples);

}  // namespace ridgebounds::verify
