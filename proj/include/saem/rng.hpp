#pragma once

#include <cstdint>
#include <random>

#include "saem/types.hpp"

namespace saem {

// Mixes a 64-bit value through the splitmix64 finalizer. Used to derive
// child-stream seeds so that splitting is a pure function of (seed, key)
// and independent of how much the parent stream has been consumed.
std::uint64_t mix64(std::uint64_t x);

/// A seeded random stream. One stream per chain; never shared.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

  double uniform() { return unif_(engine_); }
  double normal() { return normal_(engine_); }

  Vector normal_vector(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  std::uint64_t seed() const { return seed_; }

  // Derives an independent child stream. Deterministic in (seed, key) only.
  RngStream split(std::uint64_t key) const {
    return RngStream(mix64(seed_ ^ mix64(key + 0x9e3779b97f4a7c15ull)));
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace saem
