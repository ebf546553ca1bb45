#pragma once

#include <cmath>
#include <cstdint>

namespace sat {

/// Deterministic 64-bit generator (splitmix64 core). The bit stream depends
/// only on the seed and the call sequence, never on the platform or the
/// standard library, so runs reproduce exactly everywhere.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform double in [0, 1), 53 significant bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in the open interval (0, 1); safe under log().
  double uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller. Consumes two draws per call.
  double normal() {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  /// Standard Gumbel(0,1) noise: -log(-log(U)), U in (0,1).
  double gumbel() { return -std::log(-std::log(uniform_open())); }

  /// Independent child stream identified by (a, b). Does not advance the
  /// parent; the same ids always yield the same stream.
  Rng fork(uint64_t a, uint64_t b) const {
    return Rng(mix(state_ ^ mix(a + 0x9E3779B97F4A7C15ULL * (b + 1))));
  }

  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  uint64_t state_;
};

}  // namespace sat
