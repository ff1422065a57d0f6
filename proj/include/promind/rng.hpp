#pragma once

// SplitMix64 (Steele, Lea & Flood 2014). Small, fast and fully specified, so
// simulator traces can be reproduced by any implementation:
//
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
//
// uniform() takes the top 53 bits: (next() >> 11) * 2^-53, in [0, 1).

#include <cstdint>

namespace promind {

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  constexpr double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

/// Independent stream for one task: the first output of a generator seeded
/// with seed ^ (stream * golden gamma), so streams do not overlap in practice.
constexpr SplitMix64 derive_stream(std::uint64_t seed, std::uint64_t stream) noexcept {
  SplitMix64 mixer(seed ^ (stream * 0x9E3779B97F4A7C15ULL));
  return SplitMix64(mixer.next());
}

}  // namespace promind
