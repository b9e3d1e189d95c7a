#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pathfair {

// All randomness in the library flows from a single user-facing seed.
// Component streams are derived as splitmix64(seed ^ fnv1a64(tag)), so that
// every (seed, component) pair yields an independent, reproducible stream.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
  return splitmix64(base ^ fnv1a64(tag));
}

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                                 std::uint64_t index) {
  return splitmix64(derive_seed(base, tag) ^ splitmix64(index));
}

// Deterministic distribution sampling on top of mt19937_64. The standard
// library's <random> distributions are implementation-defined, so we roll
// the few transforms we need to keep datasets bit-reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller without state: two uniforms per draw.
  double gaussian(double mu, double sigma) {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mu + sigma * r * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Rejection sampling; acceptance is high for all the ranges we use.
  double truncated_gaussian(double mu, double sigma, double lo, double hi) {
    for (;;) {
      const double x = gaussian(mu, sigma);
      if (x >= lo && x <= hi) return x;
    }
  }

  double bernoulli(double p) { return uniform() < p ? 1.0 : 0.0; }

  std::uint64_t next_u64() { return eng_(); }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace pathfair
