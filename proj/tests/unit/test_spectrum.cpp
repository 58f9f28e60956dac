#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ridgebounds/errors.hpp"
#include "ridgebounds/spectrum.hpp"

using namespace ridgebounds;

namespace {

// Brute-force oracle mirroring Eq.-style definitions with plain loops; kept
// independent of the Spectrum suffix-sum machinery.
double rho_oracle(const std::vector<double>& lam, double lambda, int n, int k) {
  double tail = 0.0;
  for (size_t i = static_cast<size_t>(k); i < lam.size(); ++i) tail += lam[i];
  return (lambda + tail) / (n * lam[static_cast<size_t>(k)]);
}

std::vector<double> sorted_random_spectrum(std::mt19937& gen, int p) {
  std::uniform_real_distribution<double> u(0.01, 10.0);
  std::vector<double> lam(static_cast<size_t>(p));
  for (auto& v : lam) v = u(gen);
  std::sort(lam.begin(), lam.end(), std::greater<>());
  return lam;
}

}  // namespace

TEST_CASE("build_spectrum exponential gives e^{-gamma i}") {
  const Spectrum spec = build_spectrum(ExponentialModel{1.0}, 3);
  CHECK(spec.dim() == 3);
  CHECK(spec[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(spec[1] == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  CHECK(spec[2] == doctest::Approx(std::exp(-3.0)).epsilon(1e-15));
}

TEST_CASE("build_spectrum spiked lays out plateau") {
  const Spectrum spec = build_spectrum(SpikedModel{1, 4.0, 1.0}, 4);
  CHECK(spec.eigenvalues() == std::vector<double>{4.0, 1.0, 1.0, 1.0});
  CHECK(spec.tail_is_plateau(1));
  CHECK(spec.model_tag().find("spiked") == 0);
}

TEST_CASE("build_spectrum rejects non-monotone explicit input naming the index") {
  try {
    build_spectrum(ExplicitModel{{1.0, 2.0, 3.0}}, 3);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("index 2") != std::string::npos);
  }
  CHECK_THROWS_AS(build_spectrum(ExplicitModel{{1.0, 0.0}}, 2), ValidationError);
  CHECK_THROWS_AS(build_spectrum(ExplicitModel{{1.0, -0.5}}, 2), ValidationError);
}

TEST_CASE("effective ranks on the all-ones spectrum") {
  const Spectrum spec = Spectrum::from_values(std::vector<double>(100, 1.0));
  SUBCASE("lambda = 0") {
    const EffectiveRanks er = effective_ranks(spec, 0.0, 10, 0);
    CHECK(er.rho_k == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(er.big_R_k == doctest::Approx(100.0).epsilon(1e-14));
    CHECK(er.tail_sum == doctest::Approx(100.0));
    CHECK(er.tail_sq_sum == doctest::Approx(100.0));
  }
  SUBCASE("lambda = 100 doubles rho") {
    CHECK(effective_ranks(spec, 100.0, 10, 0).rho_k == doctest::Approx(20.0));
  }
}

TEST_CASE("effective ranks match the hand oracle on a mixed spectrum") {
  // (4,2,1,1,1,1) at n = 2: the tail at split k runs over ranks k+1..p, so
  // rho = (1.25, 1.5, 2.0) by direct evaluation.
  const Spectrum spec = Spectrum::from_values({4.0, 2.0, 1.0, 1.0, 1.0, 1.0});
  CHECK(effective_ranks(spec, 0.0, 2, 0).rho_k == doctest::Approx(1.25));
  CHECK(effective_ranks(spec, 0.0, 2, 1).rho_k == doctest::Approx(1.5));
  for (int k = 0; k < 2; ++k) {
    CHECK(effective_ranks(spec, 0.0, 2, k).rho_k ==
          doctest::Approx(rho_oracle(spec.eigenvalues(), 0.0, 2, k)));
  }
}

TEST_CASE("effective ranks domain and range errors") {
  const Spectrum spec = Spectrum::from_values({2.0, 1.0});
  CHECK_THROWS_AS(effective_ranks(spec, 0.0, 5, 2), ValidationError);
  CHECK_THROWS_AS(effective_ranks(spec, 0.0, 5, -1), ValidationError);
  CHECK_THROWS_AS(effective_ranks(spec, -3.0, 5, 0), DomainError);  // mass <= 0
  // Negative lambda is fine while the mass stays positive.
  CHECK(effective_ranks(spec, -2.5, 5, 0).rho_k == doctest::Approx(0.05));
}

TEST_CASE("rho_k is strictly increasing in lambda") {
  std::mt19937 gen(11);
  const Spectrum spec = Spectrum::from_values(sorted_random_spectrum(gen, 30));
  const int n = 12;
  for (int k : {0, 3, 11}) {
    double prev = effective_ranks(spec, -0.2, n, k).rho_k;
    for (double lambda : {0.0, 0.5, 2.0, 50.0}) {
      const double cur = effective_ranks(spec, lambda, n, k).rho_k;
      CHECK(cur > prev);
      prev = cur;
    }
  }
}

TEST_CASE("effective ranks are scale covariant") {
  std::mt19937 gen(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto lam = sorted_random_spectrum(gen, 25);
    std::vector<double> scaled = lam;
    const double c = std::uniform_real_distribution<double>(0.1, 30.0)(gen);
    for (auto& v : scaled) v *= c;
    const Spectrum base = Spectrum::from_values(lam);
    const Spectrum stretched = Spectrum::from_values(scaled);
    const double lambda = std::uniform_real_distribution<double>(0.0, 5.0)(gen);
    const EffectiveRanks a = effective_ranks(base, lambda, 9, 4);
    const EffectiveRanks b = effective_ranks(stretched, c * lambda, 9, 4);
    CHECK(b.rho_k == doctest::Approx(a.rho_k).epsilon(1e-12));
    CHECK(b.big_R_k == doctest::Approx(a.big_R_k).epsilon(1e-12));
  }
}

TEST_CASE("select_k_star agrees with a brute-force scan") {
  std::mt19937 gen(23);
  for (int trial = 0; trial < 50; ++trial) {
    const int p = 2 + static_cast<int>(gen() % 40);
    const auto lam = sorted_random_spectrum(gen, p);
    const Spectrum spec = Spectrum::from_values(lam);
    const int n = 1 + static_cast<int>(gen() % 20);
    const double b = std::uniform_real_distribution<double>(0.05, 4.0)(gen);
    const double lambda = std::uniform_real_distribution<double>(0.0, 2.0)(gen);
    const auto got = select_k_star(spec, lambda, n, b);

    std::optional<int> expected;
    for (int l = 0; l < std::min(n, p); ++l) {
      if (rho_oracle(lam, lambda, n, l) > b) {
        expected = l;
        break;
      }
    }
    CHECK(got == expected);
    if (got) {
      CHECK(effective_ranks(spec, lambda, n, *got).rho_k > b);
      for (int l = 0; l < *got; ++l) {
        CHECK(effective_ranks(spec, lambda, n, l).rho_k <= b);
      }
    }
  }
}

TEST_CASE("select_k_star worked examples") {
  const Spectrum ones = Spectrum::from_values(std::vector<double>(100, 1.0));
  CHECK(select_k_star(ones, 0.0, 10, 5.0) == 0);  // rho_0 = 10 > 5
  const Spectrum single = Spectrum::from_values({1.0});
  CHECK_FALSE(select_k_star(single, 0.0, 10, 5.0).has_value());
  const Spectrum mixed = Spectrum::from_values({4.0, 2.0, 1.0, 1.0, 1.0, 1.0});
  CHECK(select_k_star(mixed, 0.0, 2, 1.0) == 0);  // rho_0 = 1.25 already exceeds 1
  CHECK(select_k_star(mixed, 0.0, 2, 1.3) == 1);  // rho_1 = 1.5 is first past 1.3
  CHECK_FALSE(select_k_star(mixed, 0.0, 2, 2.5).has_value());
}
