#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace epilab {

/// Counter-free splitmix64 generator. Satisfies UniformRandomBitGenerator so
/// it plugs into <random> distributions.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t state = 0) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double normal() {
    std::normal_distribution<double> d(0.0, 1.0);
    return d(*this);
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    std::uniform_int_distribution<std::uint64_t> d(0, n - 1);
    return d(*this);
  }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Independent stream for replicate `replicate` of sequence position
  /// `index`, a pure function of the three inputs.
  static Rng substream(std::uint64_t seed, std::uint64_t index, std::uint64_t replicate) noexcept {
    std::uint64_t s = mix(seed ^ 0x6A09E667F3BCC909ULL);
    s = mix(s ^ (index + 0x3C6EF372FE94F82BULL));
    s = mix(s ^ (replicate + 0xA54FF53A5F1D36F1ULL));
    return Rng(s);
  }

 private:
  std::uint64_t state_;
};

}  // namespace epilab
