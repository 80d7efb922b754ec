#pragma once

#include <cmath>
#include <cstdint>

namespace dll::rng {

// splitmix64 (Steele/Lea/Flood reference constants). All dataset generation
// and weight initialization flows through this generator so that results are
// bit-reproducible across platforms and languages.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t x) { return splitmix64_next(x); }

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64_next(state_); }

  // Uniform in [0, 1) using the top 53 bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Integer uniform in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const double u = uniform();
    const auto span = static_cast<double>(hi - lo + 1);
    auto k = static_cast<std::int64_t>(u * span);
    if (k > hi - lo) k = hi - lo;
    return lo + k;
  }

  // Standard normal via Box-Muller; the paired draw is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(1.0 - u1));
    const double angle = 6.28318530717958647692 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Decorrelated stream for a (seed, instance index, field tag) triple:
// state = mix(mix(mix(seed) ^ index) ^ tag).
inline Stream field_stream(std::uint64_t seed, std::uint64_t index,
                           std::uint64_t tag) {
  return Stream(mix64(mix64(mix64(seed) ^ index) ^ tag));
}

}  // namespace dll::rng
