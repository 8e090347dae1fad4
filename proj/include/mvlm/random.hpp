#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <utility>

namespace mvlm {

/// Counter-based deterministic random source. Every draw is a pure function of
/// (seed, counter ids), so parallel evaluation order cannot change any result
/// and fixtures reproduce exactly for a given seed.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : key_(mix(seed + 0x9E3779B97F4A7C15ull)) {}

  /// SplitMix64 finalizer; bijective on 64-bit values.
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  std::uint64_t sample(std::initializer_list<std::uint64_t> ids) const {
    std::uint64_t h = key_;
    for (std::uint64_t id : ids) h = mix(h ^ id);
    return h;
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform(std::initializer_list<std::uint64_t> ids) const {
    return static_cast<double>(sample(ids) >> 11) * 0x1.0p-53;
  }

  double uniform(std::initializer_list<std::uint64_t> ids, double lo, double hi) const {
    return lo + (hi - lo) * uniform(ids);
  }

  /// Standard normal pair via Box-Muller on two derived counters.
  std::pair<double, double> gaussian_pair(std::initializer_list<std::uint64_t> ids) const {
    std::uint64_t h = key_;
    for (std::uint64_t id : ids) h = mix(h ^ id);
    const double u1 = static_cast<double>(mix(h ^ 0x1ull) >> 11) * 0x1.0p-53;
    const double u2 = static_cast<double>(mix(h ^ 0x2ull) >> 11) * 0x1.0p-53;
    const double radius = std::sqrt(-2.0 * std::log1p(-u1));  // u1 in [0,1) keeps the log finite
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  double gaussian(std::initializer_list<std::uint64_t> ids) const { return gaussian_pair(ids).first; }

 private:
  std::uint64_t key_;
};

}  // namespace mvlm
