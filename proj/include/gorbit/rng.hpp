#pragma once

#include <cstdint>

#include "gorbit/rational.hpp"

namespace gorbit {

/// Deterministic, platform-independent generator (splitmix64). All randomized
/// operations take an explicit seed so reports are reproducible byte-for-byte.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [lo, hi], inclusive.
  long uniform(long lo, long hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<long>(next() % span);
  }

  /// Rational with numerator in [lo*den, hi*den] and the given denominator.
  Rat uniform_rat(long lo, long hi, long den) {
    return Rat(uniform(lo * den, hi * den), den);
  }

  /// Child generator with an independent stream.
  Rng fork(std::uint64_t salt) { return Rng(next() ^ (salt * 0x9e3779b97f4a7c15ULL)); }

 private:
  std::uint64_t state_;
};

}  // namespace gorbit
