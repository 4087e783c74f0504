#pragma once

// Counter-based random numbers: every draw is a pure function of
// (seed, index, lane), so any slice of a sample stream can be produced
// independently and in any order.

#include <cmath>
#include <cstdint>

namespace hermix {

constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  static constexpr unsigned kLanes = 8;

  explicit constexpr CounterRng(std::uint64_t seed) : key_(splitmix64(seed ^ 0x6A09E667F3BCC909ULL)) {}

  /// Independent stream derived from this one (e.g. per trial).
  constexpr CounterRng split(std::uint64_t stream) const {
    return CounterRng(splitmix64(key_ + splitmix64(stream + 0xD1B54A32D192ED03ULL)), 0);
  }

  constexpr std::uint64_t word(std::uint64_t index, unsigned lane) const {
    return splitmix64(splitmix64(key_ + index * kLanes + lane));
  }

  /// Uniform on [0, 1).
  double uniform(std::uint64_t index, unsigned lane) const {
    return static_cast<double>(word(index, lane) >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1].
  double uniform_open0(std::uint64_t index, unsigned lane) const {
    return static_cast<double>((word(index, lane) >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal by Box-Muller from lanes (lane, lane + 1).
  double normal(std::uint64_t index, unsigned lane) const {
    const double u1 = uniform_open0(index, lane);
    const double u2 = uniform(index, lane + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  constexpr CounterRng(std::uint64_t key, int) : key_(key) {}

  std::uint64_t key_;
};

}  // namespace hermix
