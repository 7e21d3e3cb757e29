#pragma once

#include <cmath>
#include <cstdint>

namespace mldtv {

/// Seed for all stochastic operations.
struct Seed {
  std::uint64_t value = 0;
};

/// splitmix64 (Steele, Lea & Flood, "Fast splittable pseudorandom number
/// generators", OOPSLA 2014). 64-bit state, full-period, and cheap enough
/// to run one independent stream per pixel.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1]; safe under log().
  double uniform_pos() { return double((next() >> 11) + 1) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (one variate per uniform pair).
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  std::uint64_t state_;
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Independent stream for (seed, index). Streams share the splitmix64
/// increment but start at decorrelated states, so index-partitioned
/// generation is identical in serial and parallel runs.
inline SplitMix64 stream_rng(Seed seed, std::uint64_t index) {
  return SplitMix64(detail::mix64(detail::mix64(seed.value) + index));
}

/// ln of a Gamma(shape, 1) variate by Marsaglia & Tsang (2000); the shape < 1
/// case uses the boost G(a) = G(a+1) U^(1/a) in log space, which stays finite
/// down to extreme shapes (e.g. nu = 0.014).
inline double sample_log_gamma(SplitMix64& rng, double shape) {
  double boost_log = 0.0;
  double a = shape;
  if (a < 1.0) {
    boost_log = std::log(rng.uniform_pos()) / a;
    a += 1.0;
  }
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / (3.0 * std::sqrt(d));
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_pos();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 || std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v)))
      return std::log(d * v) + boost_log;
  }
}

inline double sample_gamma(SplitMix64& rng, double shape) {
  return std::exp(sample_log_gamma(rng, shape));
}

}  // namespace mldtv
