#ifndef PMVIS_RNG_HPP
#define PMVIS_RNG_HPP

#include <cmath>
#include <cstdint>

namespace pmvis {

// SplitMix64 (Steele, Lea, Vigna). Fixed here as the project-wide PRNG so
// every generated fixture is bit-reproducible across platforms; the standard
// library distributions are unspecified and must not be used for fixtures.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  uint64_t next_below(uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

  double next_range(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  bool next_bernoulli(double p) { return next_double() < p; }

  // Box-Muller; consumes exactly two uniforms per call.
  double next_normal(double mean, double stddev) {
    double u1 = next_double();
    double u2 = next_double();
    if (u1 < 1e-300) u1 = 1e-300;
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    return mean + stddev * z;
  }

  // Derives an independent stream, e.g. one per video.
  static uint64_t mix(uint64_t seed, uint64_t stream) {
    SplitMix64 g(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
    return g.next_u64();
  }

 private:
  uint64_t state_;
};

}  // namespace pmvis

#endif  // PMVIS_RNG_HPP
