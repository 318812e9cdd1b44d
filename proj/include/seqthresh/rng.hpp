#pragma once

#include <cstdint>
#include <limits>

namespace seqthresh {

__extension__ using u128 = unsigned __int128;

/// SplitMix64 finalizer. Used to hash stream keys into engine state.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix_key(std::uint64_t a, std::uint64_t b) noexcept {
  return splitmix64(a ^ splitmix64(b + 0x632be59bd9b4e019ULL));
}

/// Identifies an independent random stream. Every (seed, component, pass)
/// triple maps to its own stream, so the order in which streams are consumed
/// never changes what a given stream produces.
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t component = 0;
  std::uint64_t pass = 0;
};

// Reserved pass tags for streams that are not per-pass observation blocks.
inline constexpr std::uint64_t kSprtPass = 0xffff'ffff'0000'0001ULL;
inline constexpr std::uint64_t kSupportPass = 0xffff'ffff'0000'0002ULL;

/// xoshiro256** seeded from a hashed StreamKey. Satisfies
/// UniformRandomBitGenerator so it plugs into <random> distributions.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(StreamKey key) noexcept {
    std::uint64_t h = mix_key(mix_key(key.seed, key.component), key.pass);
    for (auto& word : state_) {
      h = splitmix64(h);
      word = h;
    }
  }

  explicit Stream(std::uint64_t seed) noexcept : Stream(StreamKey{seed, 0, 0}) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

}  // namespace seqthresh
