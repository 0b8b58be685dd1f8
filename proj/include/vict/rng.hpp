#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace vict {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Order-sensitive hash of a key tuple; used to derive independent streams.
constexpr std::uint64_t hash_key(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (auto p : parts) h = mix64(h ^ mix64(p));
  return h;
}

/// Keyed counter-based stream: draw i is mix64(key + i * golden). Two streams
/// with the same key produce the same sequence no matter what else ran
/// before, which is what makes corruption and task draws call-order
/// independent. The std engines are avoided because std distributions are
/// implementation-defined and we want portable bit-exact samples.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(key) {}
  Rng(std::initializer_list<std::uint64_t> key) : key_(hash_key(key)) {}

  std::uint64_t next_u64() { return mix64(key_ + (counter_++) * 0x9e3779b97f4a7c15ULL); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller (one value per call; the pair's twin is discarded).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Poisson sample. Knuth's product method for small means, a rounded
  /// normal approximation above 64.
  std::int64_t poisson(double mean) {
    if (mean <= 0) return 0;
    if (mean > 64.0) {
      const double s = std::round(mean + std::sqrt(mean) * normal());
      return s < 0 ? 0 : static_cast<std::int64_t>(s);
    }
    const double limit = std::exp(-mean);
    double prod = uniform();
    std::int64_t k = 0;
    while (prod > limit) {
      prod *= uniform();
      ++k;
    }
    return k;
  }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace vict
