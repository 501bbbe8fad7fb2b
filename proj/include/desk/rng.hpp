#pragma once

#include <cstdint>
#include <random>

#include "desk/core.hpp"

namespace desk {

// Seeded generator with hand-rolled bounded draws. std::*_distribution output
// is implementation-defined, so every sampling path goes through this class to
// keep seeded runs byte-reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, n), rejection-sampled.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw Error(Errc::configuration, "empty sampling range");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  // Uniform integer in [lo, hi], inclusive.
  int range(int lo, int hi) {
    if (lo > hi) throw Error(Errc::configuration, "inverted sampling range");
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  // Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return unit() < p; }

  // Stream-derivation so per-item seeds can be fixed up front; splitmix64.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace desk
