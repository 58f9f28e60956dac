#pragma once

#include <vector>

#include "ridgebounds/errors.hpp"
#include "ridgebounds/spectrum.hpp"

namespace ridgebounds {

/// True parameter theta* expressed in the covariance eigenbasis. Length must
/// match the paired spectrum's dimension.
struct SignalSpec {
  std::vector<double> theta;
};

inline void check_signal(const Spectrum& spec, const SignalSpec& sig) {
  if (static_cast<int>(sig.theta.size()) != spec.dim()) {
    throw ValidationError("signal length does not match spectrum dimension");
  }
}

/// ||theta_{k:inf}||^2 weighted by Sigma_{k:inf}: sum_{i>k} lambda_i theta_i^2.
inline double tail_energy(const Spectrum& spec, const SignalSpec& sig, int k) {
  check_signal(spec, sig);
  double s = 0.0;
  for (int i = spec.dim(); i-- > k;) {
    s += spec[i] * sig.theta[static_cast<size_t>(i)] * sig.theta[static_cast<size_t>(i)];
  }
  return s;
}

/// ||theta_{0:k}||^2 weighted by Sigma_{0:k}^{-1}: sum_{i<=k} theta_i^2 / lambda_i.
inline double head_inverse_energy(const Spectrum& spec, const SignalSpec& sig, int k) {
  check_signal(spec, sig);
  double s = 0.0;
  for (int i = 0; i < k; ++i) {
    s += sig.theta[static_cast<size_t>(i)] * sig.theta[static_cast<size_t>(i)] / spec[i];
  }
  return s;
}

/// Sigma-weighted signal energy ||theta*||^2_Sigma; the numerator of the SNR.
inline double signal_energy(const Spectrum& spec, const SignalSpec& sig) {
  return tail_energy(spec, sig, 0);
}

}  // namespace ridgebounds
