#pragma once

#include <stdexcept>
#include <string>

namespace ridgebounds {

/// Input violates a structural precondition (shape mismatch, non-monotone
/// spectrum, bad configuration field).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input is structurally fine but outside a formula's mathematical domain
/// (e.g. lambda + tail sum <= 0 makes the effective rank undefined).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The n-by-n system lambda*I + X*X^T (or a tail block of it) failed the
/// positive-definiteness check. Carries the offending smallest eigenvalue;
/// for negative lambda this signals that lambda is too negative.
class NotPositiveDefinite : public std::runtime_error {
 public:
  NotPositiveDefinite(const std::string& what, double min_eigenvalue)
      : std::runtime_error(what), min_eigenvalue_(min_eigenvalue) {}

  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

}  // namespace ridgebounds
