#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace oilrf {

// splitmix64; used only to spread user seeds into engine seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Deterministic random stream. The engine is std::mt19937_64 (bit-exact by
// the standard); all draws go through the hand-rolled methods below so no
// implementation-defined std::*_distribution enters any result.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Unbiased integer in [0, n) via rejection sampling. n must be > 0.
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t limit = n * (UINT64_MAX / n);
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller, one value per call (the cosine branch is
  // discarded so the stream advances identically everywhere).
  double normal() {
    double u1;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

 private:
  std::mt19937_64 engine_;
};

// Stream for one ensemble member, derived solely from (seed, index) so that
// training order and thread count cannot change any draw.
inline RngStream substream(std::uint64_t seed, std::uint64_t index) {
  return RngStream(splitmix64(seed ^ splitmix64(index + 1)));
}

}  // namespace oilrf
