#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "ridgebounds/errors.hpp"
#include "ridgebounds/estimator.hpp"
#include "ridgebounds/rng.hpp"

using namespace ridgebounds;

namespace {

Spectrum ones(int p) { return Spectrum::from_values(std::vector<double>(p, 1.0)); }

Eigen::VectorXd gaussian_vector(rng::Stream& stream, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = stream.normal();
  return v;
}

}  // namespace

TEST_CASE("sample_design determinism and support") {
  const Spectrum spec = ones(1);
  const Eigen::MatrixXd a = sample_design(DesignFamily::rademacher, spec, 3, 99);
  const Eigen::MatrixXd b = sample_design(DesignFamily::rademacher, spec, 3, 99);
  CHECK(a == b);  // bitwise identical
  for (int i = 0; i < 3; ++i) CHECK(std::abs(a(i, 0)) == 1.0);

  const Eigen::MatrixXd u = sample_design(DesignFamily::uniform, spec, 200, 7);
  CHECK(u.minCoeff() >= -std::sqrt(3.0));
  CHECK(u.maxCoeff() <= std::sqrt(3.0));

  const Eigen::MatrixXd c = sample_design(DesignFamily::gaussian, spec, 3, 100);
  CHECK(a != c);
}

TEST_CASE("sampled columns carry the spectrum variances") {
  const Spectrum spec = Spectrum::from_values({4.0, 1.0, 0.25});
  const int n = 10000;
  for (auto family :
       {DesignFamily::gaussian, DesignFamily::rademacher, DesignFamily::uniform}) {
    const Eigen::MatrixXd X = sample_design(family, spec, n, 2024);
    for (int j = 0; j < 3; ++j) {
      const double var = X.col(j).squaredNorm() / n;
      CHECK(std::abs(var - spec[j]) <= 3.0 * spec[j] / std::sqrt(static_cast<double>(n)));
    }
    // Whitened rows should be near-isotropic: cross-column correlation small.
    const double cross = X.col(0).dot(X.col(1)) / n / std::sqrt(spec[0] * spec[1]);
    CHECK(std::abs(cross) < 0.05);
  }
}

TEST_CASE("dual fit scalar oracles") {
  Eigen::MatrixXd X(1, 1);
  X << 2.0;
  Eigen::VectorXd y(1);
  y << 2.0;
  const RidgeSolution fit = ridge_fit_dual(X, y, 0.0);
  CHECK(fit.theta_hat[0] == doctest::Approx(1.0));  // exact interpolation y/x
  CHECK(fit.pd_margin == doctest::Approx(4.0));
  CHECK((X.transpose() * fit.dual_weights - fit.theta_hat).norm() == 0.0);

  const RidgeSolution shrunk = ridge_fit_dual(X, y, 1e9);
  CHECK(std::abs(shrunk.theta_hat[0]) < 1e-7);
}

TEST_CASE("primal oracle scalar value and domain") {
  Eigen::MatrixXd X(1, 1);
  X << 1.0;
  Eigen::VectorXd y(1);
  y << 3.0;
  CHECK(ridge_fit_primal_oracle(X, y, 1.0)[0] == doctest::Approx(1.5));
  CHECK(ridge_fit_primal_oracle(X, Eigen::VectorXd::Zero(1), 1.0).norm() == 0.0);
  CHECK_THROWS_AS(ridge_fit_primal_oracle(X, y, 0.0), DomainError);
}

TEST_CASE("dual and primal agree for positive lambda") {
  rng::Stream stream(314);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 20;
    const int p = 35;
    Eigen::MatrixXd X(n, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j) X(i, j) = stream.normal();
    const Eigen::VectorXd y = gaussian_vector(stream, n);
    const Eigen::VectorXd dual = ridge_fit_dual(X, y, 0.7).theta_hat;
    const Eigen::VectorXd primal = ridge_fit_primal_oracle(X, y, 0.7);
    CHECK((dual - primal).lpNorm<Eigen::Infinity>() /
              (1.0 + primal.lpNorm<Eigen::Infinity>()) <=
          1e-8);
  }
}

TEST_CASE("non-PD dual system raises with the offending eigenvalue") {
  Eigen::MatrixXd X(2, 3);
  X << 1.0, 0.0, 0.0, 0.0, 1.0, 0.0;
  Eigen::VectorXd y(2);
  y << 1.0, 1.0;
  try {
    ridge_fit_dual(X, y, -5.0);
    FAIL("expected NotPositiveDefinite");
  } catch (const NotPositiveDefinite& e) {
    CHECK(e.min_eigenvalue() == doctest::Approx(-4.0));
  }
}

TEST_CASE("exact bias scalar oracle and limits") {
  const Spectrum spec = ones(1);
  SignalSpec sig;
  sig.theta = {1.0};
  Eigen::MatrixXd X(1, 1);
  X << 2.0;
  CHECK(exact_bias(X, spec, sig, 4.0) == doctest::Approx(0.25));
  // Full column rank at lambda = 0 annihilates the signal.
  CHECK(exact_bias(X, spec, sig, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
  // Infinite shrinkage leaves the full Sigma-energy.
  CHECK(exact_bias(X, spec, sig, 1e14) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("bias vanishes on a full-rank square design at lambda 0") {
  const int n = 12;
  const int p = 12;
  std::vector<double> lam(p);
  for (int i = 0; i < p; ++i) lam[static_cast<size_t>(i)] = 1.0 / (1.0 + i);
  const Spectrum spec = Spectrum::from_values(lam);
  const Eigen::MatrixXd X = sample_design(DesignFamily::gaussian, spec, n, 55);
  SignalSpec sig;
  sig.theta.assign(p, 0.7);
  CHECK(exact_bias(X, spec, sig, 0.0) <= 1e-16);
}

TEST_CASE("exact variance scalar oracle and shrinkage limit") {
  const Spectrum spec = ones(1);
  Eigen::MatrixXd X(1, 1);
  X << 2.0;
  CHECK(exact_variance(X, spec, 0.0, 1.0) == doctest::Approx(0.25));
  CHECK(exact_variance(X, spec, 1e12, 1.0) <= 1e-10);
  CHECK(exact_variance(X, spec, 0.0, 3.0) == doctest::Approx(9.0 * 0.25));
}

TEST_CASE("realized variance is even in eps and matches the exact mean") {
  rng::Stream stream(161803);
  const int n = 20;
  const int p = 40;
  const Spectrum spec = ones(p);
  const Eigen::MatrixXd X = sample_design(DesignFamily::gaussian, spec, n, 9);
  const double lambda = 0.5;

  CHECK(realized_variance(X, spec, lambda, Eigen::VectorXd::Zero(n)) == 0.0);
  const Eigen::VectorXd eps = gaussian_vector(stream, n);
  CHECK(realized_variance(X, spec, lambda, eps) ==
        doctest::Approx(realized_variance(X, spec, lambda, -eps)));

  const int draws = 20000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int d = 0; d < draws; ++d) {
    const double v = realized_variance(X, spec, lambda, gaussian_vector(stream, n));
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / draws;
  const double se = std::sqrt((sum_sq / draws - mean * mean) / draws);
  CHECK(std::abs(mean - exact_variance(X, spec, lambda, 1.0)) <= 3.0 * se);
}

TEST_CASE("identity residual is numerical-noise small, negative lambda included") {
  rng::Stream stream(77);
  const int n = 15;
  const int p = 45;
  const Spectrum spec = ones(p);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd X =
        sample_design(DesignFamily::gaussian, spec, n, stream.next_word());
    const Eigen::VectorXd y = gaussian_vector(stream, n);
    const EigDiagnostics tail = eig_diagnostics(X, 0.0, 4);
    const double lambda = trial % 2 == 0 ? -0.4 * tail.mu_min_Ak : 0.3;
    const double residual = identity_residual(X, y, lambda, 4);
    CHECK(residual / (1.0 + y.norm()) <= 1e-8);
  }
  CHECK(identity_residual(sample_design(DesignFamily::gaussian, spec, n, 1),
                          Eigen::VectorXd::Ones(n), 0.1, 0) == 0.0);
}

TEST_CASE("eig diagnostics corner cases") {
  const Spectrum spec = ones(3);
  const Eigen::MatrixXd X = sample_design(DesignFamily::gaussian, spec, 2, 5);
  SUBCASE("empty tail is lambda I") {
    const EigDiagnostics diag = eig_diagnostics(X, 2.5, 3);
    CHECK(diag.mu_max_Ak == doctest::Approx(2.5));
    CHECK(diag.mu_min_Ak == doctest::Approx(2.5));
    CHECK(diag.cond_Ak == doctest::Approx(1.0));
    CHECK(diag.pd);
  }
  SUBCASE("single row gives a rank-one tail plus shift") {
    Eigen::MatrixXd row(1, 3);
    row << 1.0, 2.0, 2.0;
    const EigDiagnostics diag = eig_diagnostics(row, 0.0, 0);
    CHECK(diag.mu_max_Ak == doctest::Approx(9.0));
    CHECK(diag.cond_Ak == doctest::Approx(1.0));
  }
  SUBCASE("non-PD is reported, not thrown") {
    const EigDiagnostics diag = eig_diagnostics(X, -100.0, 0);
    CHECK_FALSE(diag.pd);
    CHECK(std::isnan(diag.cond_Ak));
  }
}

TEST_CASE("leave-one-out smallest eigenvalue obeys the Weyl ordering") {
  rng::Stream stream(1234);
  const int n = 12;
  const int p = 30;
  const Spectrum spec = ones(p);
  const Eigen::MatrixXd X = sample_design(DesignFamily::gaussian, spec, n, 21);
  const double lambda = 0.7;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  A.selfadjointView<Eigen::Lower>().rankUpdate(X);
  A = A.selfadjointView<Eigen::Lower>();
  A.diagonal().array() += lambda;
  const double mu_min_full =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A, Eigen::EigenvaluesOnly)
          .eigenvalues()
          .minCoeff();
  for (int j = 0; j < p; j += 5) {
    const double loo = eig_min_loo(X, lambda, j);
    CHECK(mu_min_full >= loo - 1e-10);
    CHECK(loo >= mu_min_full - X.col(j).squaredNorm() - 1e-10);
  }
  Eigen::MatrixXd single(2, 1);
  single << 1.5, -0.5;
  CHECK(eig_min_loo(single, 0.25, 0) == doctest::Approx(0.25));
}

TEST_CASE("risk is invariant under row permutations") {
  rng::Stream stream(99);
  const int n = 14;
  const int p = 25;
  const Spectrum spec = ones(p);
  const Eigen::MatrixXd X = sample_design(DesignFamily::gaussian, spec, n, 3);
  SignalSpec sig;
  sig.theta.assign(p, 0.0);
  for (int i = 0; i < p; ++i) sig.theta[static_cast<size_t>(i)] = std::sin(i + 1.0);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937 gen(8);
  std::shuffle(perm.begin(), perm.end(), gen);
  Eigen::MatrixXd Xp(n, p);
  for (int i = 0; i < n; ++i) Xp.row(i) = X.row(perm[static_cast<size_t>(i)]);
  const double lambda = 0.3;
  CHECK(exact_bias(Xp, spec, sig, lambda) ==
        doctest::Approx(exact_bias(X, spec, sig, lambda)).epsilon(1e-10));
  CHECK(exact_variance(Xp, spec, lambda, 1.3) ==
        doctest::Approx(exact_variance(X, spec, lambda, 1.3)).epsilon(1e-10));
}

TEST_CASE("monotone shrinkage in lambda on random instances") {
  const int n = 18;
  const int p = 30;
  const Spectrum spec = ones(p);
  SignalSpec sig;
  sig.theta.assign(p, 0.5);
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const Eigen::MatrixXd X = sample_design(DesignFamily::gaussian, spec, n, seed);
    double prev_bias = -1.0;
    double prev_var = std::numeric_limits<double>::infinity();
    for (double lambda : {0.0, 0.1, 0.5, 2.0, 10.0, 100.0}) {
      const double b = exact_bias(X, spec, sig, lambda);
      const double v = exact_variance(X, spec, lambda, 1.0);
      CHECK(b >= prev_bias - 1e-12);
      CHECK(v <= prev_var + 1e-12);
      prev_bias = b;
      prev_var = v;
    }
  }
}

TEST_CASE("RiskEvaluator matches the standalone exact forms on both sides") {
  SignalSpec sig;
  SUBCASE("overparametrized: dual side") {
    const int n = 12;
    const int p = 40;
    std::vector<double> lam(p);
    for (int i = 0; i < p; ++i) lam[static_cast<size_t>(i)] = std::exp(-0.05 * i);
    const Spectrum spec = Spectrum::from_values(lam);
    sig.theta.assign(p, 0.3);
    const Eigen::MatrixXd X = sample_design(DesignFamily::gaussian, spec, n, 17);
    const RiskEvaluator eval(X, spec, sig, 1.1, 2);
    for (double lambda : {-0.1, 0.0, 0.4, 5.0}) {
      const RiskPoint pt = eval.evaluate(lambda);
      if (!pt.pd) continue;
      CHECK(pt.bias ==
            doctest::Approx(exact_bias(X, spec, sig, lambda)).epsilon(1e-9));
      CHECK(pt.variance_expected ==
            doctest::Approx(exact_variance(X, spec, lambda, 1.1)).epsilon(1e-9));
      CHECK(pt.mse == doctest::Approx(pt.bias + pt.variance_expected));
      const EigDiagnostics diag = eig_diagnostics(X, lambda, 2);
      CHECK(pt.mu_max_Ak == doctest::Approx(diag.mu_max_Ak).epsilon(1e-9));
    }
  }
  SUBCASE("underparametrized: primal side") {
    const int n = 40;
    const int p = 12;
    const Spectrum spec = ones(p);
    sig.theta.assign(p, -0.2);
    const Eigen::MatrixXd X = sample_design(DesignFamily::uniform, spec, n, 23);
    const RiskEvaluator eval(X, spec, sig, 0.7, 3);
    for (double lambda : {0.05, 1.0, 20.0}) {
      const RiskPoint pt = eval.evaluate(lambda);
      REQUIRE(pt.pd);
      CHECK(pt.bias ==
            doctest::Approx(exact_bias(X, spec, sig, lambda)).epsilon(1e-9));
      CHECK(pt.variance_expected ==
            doctest::Approx(exact_variance(X, spec, lambda, 0.7)).epsilon(1e-9));
    }
    // lambda = 0 with n > p leaves the dual system singular: flagged.
    CHECK_FALSE(eval.evaluate(0.0).pd);
  }
}
