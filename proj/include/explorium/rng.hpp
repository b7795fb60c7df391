#pragma once

#include <cstdint>
#include <random>

namespace explorium {

// std::mt19937_64 is fully specified by the standard, the distributions are
// not. Draws are derived from raw engine output so that a seed reproduces the
// same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

/// Fixed seed offsets fanning one master seed out to independent streams.
namespace seed_stream {
inline constexpr std::uint64_t kEnv = 0;
inline constexpr std::uint64_t kInit = 1000;
inline constexpr std::uint64_t kReplay = 2000;
inline constexpr std::uint64_t kPolicy = 3000;
inline constexpr std::uint64_t kDynamicsInit = 4000;
inline constexpr std::uint64_t kDynamicsReplay = 5000;
}  // namespace seed_stream

}  // namespace explorium
