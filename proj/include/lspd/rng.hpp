#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace lspd {

// Counter-based PRNG ("sm64 v1"): the splitmix64 finalizer applied to
// key + (counter+1) * golden ratio increment. Output i depends only on
// (key, i), so streams can be reproduced in any language from the two
// 64-bit words below.
inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

/// Derives an independent child stream key from (seed, tag). Used for the
/// documented seed discipline: per-repetition, per-class and per-point
/// streams all come out of this one function.
inline constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t tag) {
  return mix64(seed + kGolden * (tag + 1));
}

inline constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t a,
                                             std::uint64_t b) {
  return derive_stream(derive_stream(seed, a), b);
}

class Rng {
public:
  explicit Rng(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() { return mix64(key_ + (++ctr_) * kGolden); }

  /// Uniform double in [0, 1).
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in (0, 1].
  double next_unit_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the second deviate is cached.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_unit_open();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  /// Exponential with the given scale (mean).
  double next_exponential(double scale) {
    return -scale * std::log(next_unit_open());
  }

  std::uint64_t key() const { return key_; }

private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace lspd
