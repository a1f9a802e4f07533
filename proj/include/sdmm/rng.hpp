#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "sdmm/matrix.hpp"

namespace sdmm {

/// Seeded random generator with a fully specified bit stream.
///
/// mt19937_64 plus an explicit Box-Muller transform, so the same seed
/// yields the same draws on every standard library (std::normal_distribution
/// leaves the algorithm unspecified, which would break table reproducibility).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Derives an independent child generator from (seed, a, b) by splitmix64
  /// hashing, so trials and cells get decorrelated streams.
  static Rng derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t x = splitmix64(seed ^ splitmix64(a + 0x9e3779b97f4a7c15ULL));
    x = splitmix64(x ^ splitmix64(b + 0xbf58476d1ce4e5b9ULL));
    return Rng(x);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller, one cached value.
  double gaussian() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    while (u1 == 0.0) {
      u1 = uniform();
    }
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
  }

  /// Circular complex Gaussian with E|z|^2 == sigma2 (variance split evenly
  /// between the real and imaginary components).
  Complex circular_gaussian(double sigma2) {
    const double component_sigma = std::sqrt(sigma2 / 2.0);
    const double re = component_sigma * gaussian();
    const double im = component_sigma * gaussian();
    return Complex(re, im);
  }

  /// Uniform integer in [0, bound), bound > 0. Rejection-free modulo is fine
  /// for the small bounds used here; determinism is what matters.
  std::uint64_t uniform_below(std::uint64_t bound) { return engine_() % bound; }

 private:
  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace sdmm
