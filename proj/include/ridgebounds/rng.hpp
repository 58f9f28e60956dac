#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ridgebounds::rng {

// Stream tags keep design, noise and audit draws on independent streams
// derived from the same base seed.
inline constexpr std::uint64_t kDesignStream = 0x6c62272e07bb0142ULL;
inline constexpr std::uint64_t kNoiseStream = 0x27d4eb2f165667c5ULL;
inline constexpr std::uint64_t kAuditStream = 0x9e3779b97f4a7c15ULL;
inline constexpr std::uint64_t kSignalStream = 0xbf58476d1ce4e5b9ULL;

/// splitmix64 finalizer; bijective on 64-bit words.
inline std::uint64_t split_mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic per-(replicate, purpose) seed derivation. The result only
/// depends on the arguments, never on call order, so replicates can run on
/// any thread and still draw identical streams.
inline std::uint64_t derive_stream(std::uint64_t base_seed, std::uint64_t index,
                                   std::uint64_t purpose) {
  return split_mix64(split_mix64(base_seed ^ purpose) + index);
}

/// Seeded random stream with fully pinned output: uniforms come from the
/// top 53 bits of mt19937_64 words and normals from Box-Muller, so the
/// sequence does not depend on standard-library distribution internals.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (pair cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    // Guard the log against u1 == 0.
    double r = std::sqrt(-2.0 * std::log1p(u1 - 1.0 + 0x1.0p-53));
    double angle = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
  }

  /// +1 or -1, equiprobable.
  double rademacher() { return (engine_() & 1u) ? 1.0 : -1.0; }

  /// Uniform on [-sqrt(3), sqrt(3)]: unit variance.
  double uniform_unit_variance() {
    return (2.0 * uniform01() - 1.0) * 1.7320508075688772935;
  }

  std::uint64_t next_word() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ridgebounds::rng
