#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "rholab/vector.hpp"

namespace rholab {

/// SplitMix64 finalizer; derives independent per-stream seeds so that sweeps
/// give identical results regardless of how trials are distributed.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  bool coin() { return (engine_() >> 63) != 0; }

  // Nonzero Gaussian vector.
  Vector gaussian(std::size_t dim) {
    std::vector<double> c(dim);
    do {
      for (double& v : c) v = normal();
    } while (std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; }));
    return Vector(std::move(c));
  }

  // Positive scale spread over a few decades.
  double log_uniform_scale(double decades = 2.0) {
    return std::pow(10.0, uniform(-decades, decades));
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace rholab
