#pragma once

#include <cstdint>
#include <random>

namespace msq {

/// Seeded 64-bit Mersenne Twister with platform-independent derived draws
/// (the standard distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)); }
  bool coin(double probability) { return uniform() < probability; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace msq
