#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ridgebounds {

struct ExplicitModel {
  std::vector<double> values;
};

struct ExponentialModel {
  double gamma = 1.0;  // lambda_i = exp(-gamma * i), i = 1..p
};

struct SpikedModel {
  int k_spikes = 1;
  double lambda_top = 1.0;
  double lambda_tail = 1.0;  // k_spikes copies of lambda_top, then lambda_tail
};

using SpectrumModel = std::variant<ExplicitModel, ExponentialModel, SpikedModel>;

/// Ordered covariance spectrum lambda_1 >= ... >= lambda_p > 0, i.e. the
/// diagonal of Sigma in the eigenbasis of the data covariance. Index-range
/// views over a split k (head = first k entries, tail = the rest) are the
/// suffix-sum accessors below; note the tail at k = 0 is the whole spectrum.
class Spectrum {
 public:
  static Spectrum from_values(std::vector<double> values,
                              std::string model_tag = "explicit");

  int dim() const { return static_cast<int>(eigenvalues_.size()); }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  /// lambda_{i+1} in 1-based rank notation.
  double operator[](int i) const { return eigenvalues_[static_cast<size_t>(i)]; }
  const std::string& model_tag() const { return model_tag_; }

  /// sum over the tail block: lambda_{k+1} + ... + lambda_p (1-based).
  double tail_sum(int k) const;
  /// sum of squares over the same tail block.
  double tail_sq_sum(int k) const;
  double total_sum() const { return tail_sum(0); }
  double total_sq_sum() const { return tail_sq_sum(0); }

  /// true when the tail block k.. is exactly constant (plateau), the shape
  /// spiked-model spectra have.
  bool tail_is_plateau(int k) const;

 private:
  Spectrum(std::vector<double> values, std::string model_tag);

  std::vector<double> eigenvalues_;
  std::vector<double> suffix_sum_;     // suffix_sum_[k] = sum_{i >= k} eigenvalues_[i]
  std::vector<double> suffix_sq_sum_;
  std::string model_tag_;
};

/// Materializes a model descriptor at ambient dimension p. For the explicit
/// model p must match the value count.
Spectrum build_spectrum(const SpectrumModel& model, int p);

/// Effective ranks of the regularized tail at split k:
///   rho_k = (lambda + sum_{i>k} lambda_i) / (n * lambda_{k+1}),
///   R_k   = (lambda + sum_{i>k} lambda_i)^2 / sum_{i>k} lambda_i^2.
struct EffectiveRanks {
  int k = 0;
  double rho_k = 0.0;
  double big_R_k = 0.0;
  double tail_sum = 0.0;
  double tail_sq_sum = 0.0;
};

/// Requires 0 <= k < min(n, p) and lambda + tail_sum > 0 (lambda may be
/// negative as long as the regularized tail mass stays positive).
EffectiveRanks effective_ranks(const Spectrum& spec, double lambda, int n, int k);

/// Smallest l in [0, min(n, p) - 1] with rho_l > b, or nullopt. Splits with
/// undefined rho (lambda + tail <= 0) never qualify.
std::optional<int> select_k_star(const Spectrum& spec, double lambda, int n,
                                 double b = 2.0);

}  // namespace ridgebounds
