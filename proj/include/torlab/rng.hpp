#pragma once

#include <cstdint>
#include <cmath>

namespace torlab {

/// Deterministic counter-based RNG (splitmix64). Streams are keyed by
/// (seed, tags...) so draws never depend on call order or platform.
struct RngStream {
  std::uint64_t state;

  explicit RngStream(std::uint64_t seed) : state(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Derive a child stream; order-independent given the same tags.
  RngStream child(std::uint64_t tag) const {
    return RngStream(mix(state ^ (tag * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL)));
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double next_unit() { return std::ldexp(static_cast<double>(next_u64() >> 11), -53); }

  /// Uniform in [-a, a).
  double next_symmetric(double a) { return a * (2.0 * next_unit() - 1.0); }
};

}  // namespace torlab
