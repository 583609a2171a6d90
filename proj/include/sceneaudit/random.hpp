#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "sceneaudit/errors.hpp"

namespace sceneaudit {

/// Seeded random source built on std::mt19937_64 (the 64-bit Mersenne Twister,
/// whose output sequence is fixed by the C++ standard). The variate transforms
/// below are implemented by hand instead of via std::uniform_real_distribution
/// and friends, because the standard leaves those algorithms unspecified and
/// identical seeds must reproduce identical scenes on every platform.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1), 53 bits of precision.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Normal variate via the Box-Muller transform. Consumes two uniforms per call.
  double normal(double mean = 0.0, double stddev = 1.0) {
    double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform index in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw ValidationError("uniform_index requires n > 0");
    return static_cast<std::size_t>(next_u64() % n);
  }

  /// Index drawn proportionally to the given non-negative weights.
  std::size_t weighted_index(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (weights.empty() || total <= 0.0)
      throw ValidationError("weighted_index requires positive total weight");
    double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return weights.size() - 1;
  }

  /// Fisher-Yates shuffle, driven by uniform_index for portability.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace sceneaudit
