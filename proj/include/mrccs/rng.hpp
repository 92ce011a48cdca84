#pragma once

#include <cstdint>
#include <random>

namespace mrccs {

// Deterministic PRNG. All randomness in the project (weight init, patch
// sampling, test data) flows through this wrapper; the value-to-sample
// mappings are pinned here rather than left to the standard library's
// implementation-defined distributions, so a seed reproduces bit-identical
// streams everywhere.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // [0,1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  float uniform(float lo, float hi) {
    return lo + static_cast<float>(uniform()) * (hi - lo);
  }

  // [0, n)
  int uniform_int(int n) {
    return n <= 1 ? 0 : static_cast<int>(uniform() * n);
  }

  bool bernoulli(double p = 0.5) { return uniform() < p; }

  // Standard normal via Box-Muller on the pinned uniform stream.
  float normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    return static_cast<float>(std::sqrt(-2.0 * std::log(u1)) *
                              std::cos(6.283185307179586 * u2));
  }

  // splitmix64-style mixer for deriving per-step seeds from a base seed.
  static uint64_t mix(uint64_t a, uint64_t b) {
    uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace mrccs
