#include "mdpdesign/rng.hpp"

#include <cmath>
#include <numbers>

namespace mdpdesign {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kDomain = 0x6D64706465736967ULL;  // "mdpdesig"
}  // namespace

std::uint64_t CounterRng::mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

CounterRng CounterRng::stream(std::uint64_t seed, StreamTag tag, std::uint64_t i, std::uint64_t j, std::uint64_t k) {
  std::uint64_t key = mix(seed ^ kDomain);
  key = mix(key + static_cast<std::uint64_t>(tag));
  key = mix(key + i);
  key = mix(key + j);
  key = mix(key + k);
  return CounterRng(key);
}

std::uint64_t CounterRng::next_u64() {
  ++counter_;
  return mix(key_ + counter_ * kGolden);
}

double CounterRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double CounterRng::normal(double mean, double stddev) {
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(1.0 - u1));
  return mean + stddev * radius * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace mdpdesign
