#pragma once

#include <cstdint>
#include <limits>

namespace nuelab {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based random stream for one ensemble member.
///
/// The k-th draw is a pure function of (seed, index, k), so an ensemble
/// produces the same samples no matter how its members are sharded across
/// workers. Satisfies UniformRandomBitGenerator.
class StartStream {
 public:
  using result_type = std::uint64_t;

  StartStream(std::uint64_t seed, std::uint64_t index)
      : key_(mix64(seed ^ mix64(index ^ 0xD1B54A32D192ED03ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix64(key_ + 0x9E3779B97F4A7C15ULL * ++counter_); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  /// Uniform double in (0, 1).
  double uniform_open() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace nuelab
