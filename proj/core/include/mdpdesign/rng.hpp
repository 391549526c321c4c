#pragma once

// Counter-based 64-bit generator with explicit stream splitting, so that a
// seed produces the same numbers on every platform and in every language that
// implements the same few lines.
//
// Generator "splitmix64-ctr/v1":
//   mix(z)    = z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//               z ^= z >> 27; z *= 0x94D049BB133111EB; z ^= z >> 31
//   key       = mix(mix(mix(mix(mix(seed ^ 0x6D64706465736967) + tag) + i) + j) + k)
//   draw #c   = mix(key + (c + 1) * 0x9E3779B97F4A7C15)          (c = 0, 1, ...)
//   uniform   = (draw >> 11) * 2^-53                                in [0, 1)
//   normal    = sqrt(-2 ln(1 - u1)) * cos(2 pi u2)                 two draws each
//
// (tag, i, j, k) name a stream; see StreamTag for the tags used by the
// instance generator.

#include <cstdint>

namespace mdpdesign {

enum class StreamTag : std::uint64_t {
  VariableBounds = 1,
  LeaderCoefficients = 2,
  LeaderRhs = 3,
  DesignCost = 4,
  ScenarioProbability = 5,
  Discount = 6,
  InitialDistribution = 7,
  Transition = 8,
  CostSensitivity = 9,
  CostConstant = 10,
  RunSeed = 11,
};

class CounterRng {
 public:
  static constexpr const char* kName = "splitmix64-ctr/v1";

  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static CounterRng stream(std::uint64_t seed, StreamTag tag, std::uint64_t i = 0, std::uint64_t j = 0,
                           std::uint64_t k = 0);

  static std::uint64_t mix(std::uint64_t z);

  std::uint64_t next_u64();
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal(double mean, double stddev);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace mdpdesign
