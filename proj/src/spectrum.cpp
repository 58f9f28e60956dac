#include "ridgebounds/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ridgebounds/errors.hpp"

namespace ridgebounds {

Spectrum::Spectrum(std::vector<double> values, std::string model_tag)
    : eigenvalues_(std::move(values)), model_tag_(std::move(model_tag)) {
  if (eigenvalues_.empty()) {
    throw ValidationError("spectrum must contain at least one eigenvalue");
  }
  for (size_t i = 0; i < eigenvalues_.size(); ++i) {
    if (!(eigenvalues_[i] > 0.0) || !std::isfinite(eigenvalues_[i])) {
      std::ostringstream msg;
      msg << "spectrum eigenvalue at index " << i + 1 << " is not a positive finite real: "
          << eigenvalues_[i];
      throw ValidationError(msg.str());
    }
    if (i > 0 && eigenvalues_[i] > eigenvalues_[i - 1]) {
      std::ostringstream msg;
      msg << "spectrum is not non-increasing at index " << i + 1 << ": "
          << eigenvalues_[i - 1] << " < " << eigenvalues_[i];
      throw ValidationError(msg.str());
    }
  }
  // Backward suffix accumulation; more accurate than forward summation for
  // decaying tails.
  const size_t p = eigenvalues_.size();
  suffix_sum_.assign(p + 1, 0.0);
  suffix_sq_sum_.assign(p + 1, 0.0);
  for (size_t i = p; i-- > 0;) {
    suffix_sum_[i] = suffix_sum_[i + 1] + eigenvalues_[i];
    suffix_sq_sum_[i] = suffix_sq_sum_[i + 1] + eigenvalues_[i] * eigenvalues_[i];
  }
}

Spectrum Spectrum::from_values(std::vector<double> values, std::string model_tag) {
  return Spectrum(std::move(values), std::move(model_tag));
}

double Spectrum::tail_sum(int k) const {
  if (k < 0 || k > dim()) throw ValidationError("tail_sum: k out of range");
  return suffix_sum_[static_cast<size_t>(k)];
}

double Spectrum::tail_sq_sum(int k) const {
  if (k < 0 || k > dim()) throw ValidationError("tail_sq_sum: k out of range");
  return suffix_sq_sum_[static_cast<size_t>(k)];
}

bool Spectrum::tail_is_plateau(int k) const {
  if (k < 0 || k >= dim()) return false;
  return eigenvalues_[static_cast<size_t>(k)] == eigenvalues_.back();
}

Spectrum build_spectrum(const SpectrumModel& model, int p) {
  if (p < 1) throw ValidationError("build_spectrum: p must be >= 1");
  if (const auto* e = std::get_if<ExplicitModel>(&model)) {
    if (!e->values.empty() && static_cast<int>(e->values.size()) != p) {
      throw ValidationError("build_spectrum: explicit value count does not match p");
    }
    return Spectrum::from_values(e->values);
  }
  if (const auto* e = std::get_if<ExponentialModel>(&model)) {
    if (!(e->gamma > 0.0)) throw ValidationError("build_spectrum: gamma must be positive");
    std::vector<double> values(static_cast<size_t>(p));
    for (int i = 0; i < p; ++i) {
      values[static_cast<size_t>(i)] = std::exp(-e->gamma * static_cast<double>(i + 1));
    }
    std::ostringstream tag;
    tag << "exponential{gamma=" << e->gamma << "}";
    return Spectrum::from_values(std::move(values), tag.str());
  }
  const auto& s = std::get<SpikedModel>(model);
  if (!(s.lambda_tail > 0.0) || s.lambda_top < s.lambda_tail) {
    throw ValidationError("build_spectrum: need lambda_top >= lambda_tail > 0");
  }
  if (s.k_spikes < 0 || s.k_spikes >= p) {
    throw ValidationError("build_spectrum: need 0 <= k_spikes < p");
  }
  std::vector<double> values(static_cast<size_t>(p), s.lambda_tail);
  std::fill(values.begin(), values.begin() + s.k_spikes, s.lambda_top);
  std::ostringstream tag;
  tag << "spiked{k_spikes=" << s.k_spikes << ",lambda_top=" << s.lambda_top
      << ",lambda_tail=" << s.lambda_tail << "}";
  return Spectrum::from_values(std::move(values), tag.str());
}

EffectiveRanks effective_ranks(const Spectrum& spec, double lambda, int n, int k) {
  if (n < 1) throw ValidationError("effective_ranks: n must be >= 1");
  const int limit = std::min(n, spec.dim());
  if (k < 0 || k >= limit) {
    throw ValidationError("effective_ranks: k must lie in [0, min(n, p))");
  }
  EffectiveRanks out;
  out.k = k;
  out.tail_sum = spec.tail_sum(k);
  out.tail_sq_sum = spec.tail_sq_sum(k);
  const double mass = lambda + out.tail_sum;
  if (!(mass > 0.0)) {
    throw DomainError("effective_ranks: lambda + tail sum <= 0, rho_k undefined");
  }
  out.rho_k = mass / (static_cast<double>(n) * spec[k]);
  out.big_R_k = mass * mass / out.tail_sq_sum;
  return out;
}

std::optional<int> select_k_star(const Spectrum& spec, double lambda, int n, double b) {
  if (n < 1) throw ValidationError("select_k_star: n must be >= 1");
  if (!(b > 0.0)) throw ValidationError("select_k_star: b must be positive");
  const int limit = std::min(n, spec.dim());
  for (int l = 0; l < limit; ++l) {
    const double mass = lambda + spec.tail_sum(l);
    if (!(mass > 0.0)) continue;
    if (mass / (static_cast<double>(n) * spec[l]) > b) return l;
  }
  return std::nullopt;
}

}  // namespace ridgebounds
