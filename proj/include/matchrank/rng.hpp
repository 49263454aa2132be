#pragma once

#include <cstdint>
#include <cmath>
#include <numbers>

namespace matchrank {

// splitmix64 stream with hierarchical forking. All randomness in the project
// goes through this type so that results are bit-reproducible across
// platforms (std:: distributions are implementation-defined and are not used).
//
// fork(tag) derives an independent child stream from the current state and a
// tag without advancing the parent. Parents used for forking should not also
// be drawn from; each module documents its tag layout.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1), 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool next_bernoulli(double p) { return next_double() < p; }

  // N(0, sd^2) via Box-Muller; uses two uniforms per call, no caching.
  double next_gaussian(double sd) {
    const double u1 = 1.0 - next_double();  // (0, 1], keeps log() finite
    const double u2 = next_double();
    return sd * std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  RngStream fork(std::uint64_t tag) const {
    std::uint64_t z = state_ ^ (0xD1B54A32D192ED03ull * (tag + 1));
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
    return RngStream(z);
  }

 private:
  std::uint64_t state_;
};

}  // namespace matchrank
