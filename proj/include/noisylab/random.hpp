#pragma once

#include <cstdint>
#include <limits>

namespace noisylab {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seeded random source. Every stream is a pure function of (seed, stream),
/// so trial i can be replayed without generating trials 0..i-1.
///
/// Satisfies UniformRandomBitGenerator, but the library draws only through
/// the member helpers so results never depend on the standard library's
/// distribution implementations.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : state_(mix64(mix64(seed) ^ ((stream + 1) * 0xD1B54A32D192ED03ULL))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t index(std::uint64_t n) noexcept {
    __extension__ using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<u128>((*this)()) * n) >> 64);
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Standard normal draw (Marsaglia polar method, second variate discarded).
  double normal() noexcept;

  /// Independent child stream, e.g. one per Monte-Carlo trial.
  static CounterRng substream(std::uint64_t seed, std::uint64_t index) noexcept {
    return CounterRng(seed, index);
  }

 private:
  std::uint64_t state_;
};

}  // namespace noisylab
