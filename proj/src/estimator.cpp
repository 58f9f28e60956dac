#include "ridgebounds/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ridgebounds/errors.hpp"
#include "ridgebounds/rng.hpp"

namespace ridgebounds {

namespace {

Eigen::MatrixXd gram_lower(const Eigen::MatrixXd& M) {
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(M.rows(), M.rows());
  G.selfadjointView<Eigen::Lower>().rankUpdate(M);
  return G.selfadjointView<Eigen::Lower>();
}

Eigen::MatrixXd dual_system(const Eigen::MatrixXd& X, double lambda) {
  Eigen::MatrixXd A = gram_lower(X);
  A.diagonal().array() += lambda;
  return A;
}

struct PdCheck {
  double mu_min;
  double mu_max;
};

// Eigenvalue-based PD check; the eigensolver also supplies the pd_margin the
// callers record.
PdCheck require_pd(const Eigen::MatrixXd& A, double pd_tolerance,
                   const char* context) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  const double mu_min = es.eigenvalues().minCoeff();
  const double mu_max = es.eigenvalues().maxCoeff();
  if (!(mu_min > 0.0) || mu_min <= pd_tolerance * std::max(mu_max, 0.0)) {
    throw NotPositiveDefinite(
        std::string(context) + ": system is not positive definite beyond tolerance",
        mu_min);
  }
  return {mu_min, mu_max};
}

}  // namespace

DesignFamily design_family_from_string(const std::string& name) {
  if (name == "gaussian") return DesignFamily::gaussian;
  if (name == "rademacher") return DesignFamily::rademacher;
  if (name == "uniform") return DesignFamily::uniform;
  throw ValidationError("unknown design family: " + name);
}

std::string to_string(DesignFamily family) {
  switch (family) {
    case DesignFamily::gaussian:
      return "gaussian";
    case DesignFamily::rademacher:
      return "rademacher";
    case DesignFamily::uniform:
      return "uniform";
  }
  return "unknown";
}

Eigen::MatrixXd sample_design(DesignFamily family, const Spectrum& spec, int n,
                              std::uint64_t seed) {
  if (n < 1) throw ValidationError("sample_design: n must be >= 1");
  const int p = spec.dim();
  Eigen::VectorXd sqrt_sigma(p);
  for (int j = 0; j < p; ++j) sqrt_sigma[j] = std::sqrt(spec[j]);
  Eigen::MatrixXd X(n, p);
  rng::Stream stream(seed);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      double z = 0.0;
      switch (family) {
        case DesignFamily::gaussian:
          z = stream.normal();
          break;
        case DesignFamily::rademacher:
          z = stream.rademacher();
          break;
        case DesignFamily::uniform:
          z = stream.uniform_unit_variance();
          break;
      }
      X(i, j) = z * sqrt_sigma[j];
    }
  }
  return X;
}

Eigen::VectorXd sample_noise(int n, double sigma_eps, std::uint64_t seed) {
  Eigen::VectorXd eps(n);
  rng::Stream stream(seed);
  for (int i = 0; i < n; ++i) eps[i] = sigma_eps * stream.normal();
  return eps;
}

RidgeSolution ridge_fit_dual(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             double lambda, double pd_tolerance) {
  if (y.size() != X.rows()) throw ValidationError("ridge_fit_dual: y length != n");
  const Eigen::MatrixXd A = dual_system(X, lambda);
  const PdCheck pd = require_pd(A, pd_tolerance, "ridge_fit_dual");
  RidgeSolution sol;
  sol.lambda = lambda;
  sol.pd_margin = pd.mu_min;
  sol.dual_weights = Eigen::LLT<Eigen::MatrixXd>(A).solve(y);
  sol.theta_hat = X.transpose() * sol.dual_weights;
  return sol;
}

Eigen::VectorXd ridge_fit_primal_oracle(const Eigen::MatrixXd& X,
                                        const Eigen::VectorXd& y, double lambda) {
  if (!(lambda > 0.0)) {
    throw DomainError("primal oracle requires lambda > 0 (unconditionally PD regime)");
  }
  if (y.size() != X.rows()) throw ValidationError("primal oracle: y length != n");
  Eigen::MatrixXd M = gram_lower(X.transpose());
  M.diagonal().array() += lambda;
  return Eigen::LLT<Eigen::MatrixXd>(M).solve(X.transpose() * y);
}

double exact_bias(const Eigen::MatrixXd& X, const Spectrum& spec,
                  const SignalSpec& sig, double lambda, double pd_tolerance) {
  check_signal(spec, sig);
  if (spec.dim() != X.cols()) throw ValidationError("exact_bias: p mismatch");
  const Eigen::MatrixXd A = dual_system(X, lambda);
  require_pd(A, pd_tolerance, "exact_bias");
  const Eigen::Map<const Eigen::VectorXd> theta(sig.theta.data(),
                                                static_cast<Eigen::Index>(sig.theta.size()));
  const Eigen::VectorXd v = Eigen::LLT<Eigen::MatrixXd>(A).solve(X * theta);
  const Eigen::VectorXd r = theta - X.transpose() * v;
  double bias = 0.0;
  for (int i = 0; i < spec.dim(); ++i) bias += spec[i] * r[i] * r[i];
  return bias;
}

double exact_variance(const Eigen::MatrixXd& X, const Spectrum& spec, double lambda,
                      double sigma_eps, double pd_tolerance) {
  if (spec.dim() != X.cols()) throw ValidationError("exact_variance: p mismatch");
  const Eigen::MatrixXd A = dual_system(X, lambda);
  require_pd(A, pd_tolerance, "exact_variance");
  const Eigen::MatrixXd M = Eigen::LLT<Eigen::MatrixXd>(A).solve(X);
  double trace = 0.0;
  for (int j = 0; j < spec.dim(); ++j) trace += spec[j] * M.col(j).squaredNorm();
  return sigma_eps * sigma_eps * trace;
}

double realized_variance(const Eigen::MatrixXd& X, const Spectrum& spec,
                         double lambda, const Eigen::VectorXd& eps,
                         double pd_tolerance) {
  if (spec.dim() != X.cols()) throw ValidationError("realized_variance: p mismatch");
  if (eps.size() != X.rows()) throw ValidationError("realized_variance: eps length != n");
  const Eigen::MatrixXd A = dual_system(X, lambda);
  require_pd(A, pd_tolerance, "realized_variance");
  const Eigen::VectorXd u =
      X.transpose() * Eigen::LLT<Eigen::MatrixXd>(A).solve(eps);
  double value = 0.0;
  for (int i = 0; i < spec.dim(); ++i) value += spec[i] * u[i] * u[i];
  return value;
}

double identity_residual(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         double lambda, int k, double pd_tolerance) {
  const int p = static_cast<int>(X.cols());
  if (k < 0 || k > p) throw ValidationError("identity_residual: k must lie in [0, p]");
  if (k == 0) return 0.0;  // empty head block
  const RidgeSolution fit = ridge_fit_dual(X, y, lambda, pd_tolerance);
  const Eigen::MatrixXd head = X.leftCols(k);
  Eigen::MatrixXd A_k = gram_lower(X.rightCols(p - k));
  A_k.diagonal().array() += lambda;
  require_pd(A_k, pd_tolerance, "identity_residual (A_k)");
  const Eigen::LLT<Eigen::MatrixXd> llt(A_k);
  const Eigen::VectorXd theta_head = fit.theta_hat.head(k);
  const Eigen::VectorXd lhs =
      theta_head + head.transpose() * llt.solve(head * theta_head);
  const Eigen::VectorXd rhs = head.transpose() * llt.solve(y);
  return (lhs - rhs).norm();
}

EigDiagnostics eig_diagnostics(const Eigen::MatrixXd& X, double lambda, int k) {
  const int p = static_cast<int>(X.cols());
  if (k < 0 || k > p) throw ValidationError("eig_diagnostics: k must lie in [0, p]");
  EigDiagnostics diag;
  diag.k = k;
  Eigen::MatrixXd A_k = gram_lower(X.rightCols(p - k));
  A_k.diagonal().array() += lambda;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A_k, Eigen::EigenvaluesOnly);
  diag.mu_min_Ak = es.eigenvalues().minCoeff();
  diag.mu_max_Ak = es.eigenvalues().maxCoeff();
  diag.pd = diag.mu_min_Ak > 0.0;
  diag.cond_Ak = diag.pd ? diag.mu_max_Ak / diag.mu_min_Ak
                         : std::numeric_limits<double>::quiet_NaN();
  return diag;
}

double eig_min_loo(const Eigen::MatrixXd& X, double lambda, int j) {
  if (j < 0 || j >= X.cols()) throw ValidationError("eig_min_loo: column out of range");
  Eigen::MatrixXd A = dual_system(X, lambda);
  A.selfadjointView<Eigen::Lower>().rankUpdate(X.col(j), -1.0);
  A = A.selfadjointView<Eigen::Lower>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

RiskEvaluator::RiskEvaluator(const Eigen::MatrixXd& X, const Spectrum& spec,
                             const SignalSpec& sig, double sigma_eps,
                             int diagnostics_k)
    : n_(static_cast<int>(X.rows())),
      p_(static_cast<int>(X.cols())),
      dual_side_(X.cols() > X.rows()),
      sigma_eps_(sigma_eps),
      X_(&X) {
  check_signal(spec, sig);
  if (spec.dim() != p_) throw ValidationError("RiskEvaluator: p mismatch");
  if (diagnostics_k < 0 || diagnostics_k > p_) {
    throw ValidationError("RiskEvaluator: diagnostics k must lie in [0, p]");
  }
  diagnostics_k_ = diagnostics_k;
  theta_ = Eigen::Map<const Eigen::VectorXd>(sig.theta.data(), p_);
  sigma_diag_.resize(p_);
  for (int i = 0; i < p_; ++i) sigma_diag_[i] = spec[i];

  if (dual_side_) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_lower(X));
    gram_eigs_ = es.eigenvalues();
    basis_ = es.eigenvectors();
    gram_min_eig_ = gram_eigs_.minCoeff();
    gram_max_eig_ = gram_eigs_.maxCoeff();
    signal_coeffs_ = basis_.transpose() * (X * theta_);
    // Column scaling by sqrt(Sigma) turns tr(A^{-2} X Sigma X^T) into a
    // per-eigenvalue weighted sum.
    Eigen::MatrixXd scaled = basis_.transpose() * X;
    for (int j = 0; j < p_; ++j) scaled.col(j) *= std::sqrt(sigma_diag_[j]);
    variance_weights_ = scaled.rowwise().squaredNorm();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_lower(X.transpose()));
    gram_eigs_ = es.eigenvalues();
    basis_ = es.eigenvectors();
    // X X^T shares the nonzero spectrum of X^T X and pads with n - p zeros.
    gram_min_eig_ = n_ > p_ ? std::min(0.0, gram_eigs_.minCoeff()) : gram_eigs_.minCoeff();
    gram_max_eig_ = std::max(0.0, gram_eigs_.maxCoeff());
    signal_coeffs_ = basis_.transpose() * theta_;
    variance_weights_.resize(p_);
    for (int j = 0; j < p_; ++j) {
      variance_weights_[j] = basis_.col(j).cwiseAbs2().dot(sigma_diag_);
    }
  }

  const int tail_cols = p_ - diagnostics_k_;
  if (tail_cols == 0) {
    tail_max_eig_ = 0.0;
    tail_min_eig_ = 0.0;
  } else if (tail_cols >= n_ || dual_side_) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        gram_lower(X.rightCols(tail_cols)), Eigen::EigenvaluesOnly);
    tail_max_eig_ = es.eigenvalues().maxCoeff();
    tail_min_eig_ = es.eigenvalues().minCoeff();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        gram_lower(X.rightCols(tail_cols).transpose()), Eigen::EigenvaluesOnly);
    tail_max_eig_ = std::max(0.0, es.eigenvalues().maxCoeff());
    tail_min_eig_ = std::min(0.0, es.eigenvalues().minCoeff());
  }
}

RiskPoint RiskEvaluator::evaluate(double lambda, double pd_tolerance) const {
  RiskPoint pt;
  pt.lambda = lambda;
  pt.pd_margin = lambda + gram_min_eig_;
  pt.mu_max_Ak = lambda + tail_max_eig_;
  pt.mu_min_Ak = lambda + tail_min_eig_;
  pt.cond_Ak = pt.mu_min_Ak > 0.0 ? pt.mu_max_Ak / pt.mu_min_Ak
                                  : std::numeric_limits<double>::quiet_NaN();
  const double mu_max = lambda + gram_max_eig_;
  pt.pd = pt.pd_margin > 0.0 && pt.pd_margin > pd_tolerance * std::max(mu_max, 0.0);
  if (!pt.pd) {
    pt.bias = std::numeric_limits<double>::quiet_NaN();
    pt.variance_expected = pt.bias;
    pt.mse = pt.bias;
    return pt;
  }

  if (dual_side_) {
    Eigen::VectorXd shifted = (gram_eigs_.array() + lambda).matrix();
    const Eigen::VectorXd v =
        basis_ * (signal_coeffs_.array() / shifted.array()).matrix();
    const Eigen::VectorXd r = theta_ - X_->transpose() * v;
    pt.bias = r.cwiseAbs2().dot(sigma_diag_);
    pt.variance_expected =
        sigma_eps_ * sigma_eps_ *
        (variance_weights_.array() / shifted.array().square()).sum();
  } else {
    Eigen::ArrayXd shifted = gram_eigs_.array() + lambda;
    const Eigen::VectorXd shrink =
        (gram_eigs_.array() / shifted).matrix().cwiseProduct(signal_coeffs_);
    const Eigen::VectorXd r = theta_ - basis_ * shrink;
    pt.bias = r.cwiseAbs2().dot(sigma_diag_);
    pt.variance_expected =
        sigma_eps_ * sigma_eps_ *
        (variance_weights_.array() * gram_eigs_.array() / shifted.square()).sum();
  }
  pt.mse = pt.bias + pt.variance_expected;
  return pt;
}

}  // namespace ridgebounds
