#pragma once

// Seedable random sources shared by the samplers and the experiment harness.
//
// Every random decision in the library is a fair coin drawn from a
// xoshiro256** generator whose state is expanded from a 64-bit seed with
// splitmix64. Both algorithms are fully specified bit-for-bit, so a seed
// reproduces the same run on any platform and standard library.

#include <cstdint>
#include <limits>
#include <string_view>

namespace cvmcov {

/// Identifier echoed in every report and CSV so runs can be replayed.
inline constexpr std::string_view kRngAlgorithm = "xoshiro256**/splitmix64";

/// One step of splitmix64: advances `state` and returns the mixed output.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Order-free seed derivation: mixes (base, a, b) so that every
/// (buffer size index, replication) pair gets an independent stream
/// regardless of the order in which replications execute.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                    std::uint64_t b) noexcept {
  std::uint64_t state = base;
  std::uint64_t h = splitmix64(state);
  state = h ^ (a * 0xd1342543de82ef95ULL);
  h = splitmix64(state);
  state = h ^ (b * 0xaf251af3b0f025b5ULL);
  return splitmix64(state);
}

class Xoshiro256StarStar {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Xoshiro256StarStar(std::uint64_t seed) noexcept {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
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

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4]{};
};

/// Fair coin flips, one generator bit per flip, most significant bit first.
class CoinSource {
 public:
  explicit constexpr CoinSource(std::uint64_t seed) noexcept : gen_(seed) {}

  constexpr bool heads() noexcept {
    if (remaining_ == 0) {
      bits_ = gen_();
      remaining_ = 64;
    }
    const bool h = (bits_ >> 63) != 0;
    bits_ <<= 1;
    --remaining_;
    return h;
  }

  /// Bernoulli(2^-count): true iff `count` consecutive flips are all heads.
  /// Stops at the first tail, so the expected cost is under two flips.
  constexpr bool all_heads(std::uint64_t count) noexcept {
    for (std::uint64_t i = 0; i < count; ++i) {
      if (!heads()) return false;
    }
    return true;
  }

 private:
  Xoshiro256StarStar gen_;
  std::uint64_t bits_ = 0;
  int remaining_ = 0;
};

}  // namespace cvmcov
