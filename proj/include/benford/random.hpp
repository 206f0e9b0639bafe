#pragma once

// Counter-based random numbers. Every stream is addressed by
// (seed, substream, lane): the seed is the Philox key, the substream and lane
// occupy the counter words, so replicate b of a Monte Carlo run draws the
// same numbers no matter which worker thread evaluates it.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace benford {

/// Philox4x32-10 block function (Salmon et al., Random123).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Independent purposes within one substream.
enum class Lane : std::uint32_t {
  significand = 0,
  digit = 1,
  fraction = 2,
  mixture = 3,
  contaminant = 4,
  permutation = 5,
  jitter = 6,
  gaussian = 7,
};

/// SplitMix64 finalizer, used to derive child seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return mix64(seed ^ mix64(tag));
}

/// Address of one reproducible stream family.
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t substream = 0;
};

/// 64-bit generator over one (seed, substream, lane) address. Satisfies
/// UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint64_t substream, Lane lane = Lane::significand)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        lane_(static_cast<std::uint32_t>(lane)),
        sub_lo_(static_cast<std::uint32_t>(substream)),
        sub_hi_(static_cast<std::uint32_t>(substream >> 32)) {}

  RandomStream(StreamKey key, Lane lane) : RandomStream(key.seed, key.substream, lane) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (index_ == 2) refill();
    return buffer_[index_++];
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal by Box-Muller; the second variate is kept for the next
  /// call.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Uniform integer in [0, bound) by Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t x = (*this)();
      const __uint128_t m = static_cast<__uint128_t>(x) * bound;
      if (static_cast<std::uint64_t>(m) >= threshold) {
        return static_cast<std::uint64_t>(m >> 64);
      }
    }
  }

 private:
  void refill() {
    const auto out = Philox4x32::block({block_, lane_, sub_lo_, sub_hi_}, key_);
    ++block_;
    buffer_[0] = (std::uint64_t{out[1]} << 32) | out[0];
    buffer_[1] = (std::uint64_t{out[3]} << 32) | out[2];
    index_ = 0;
  }

  Philox4x32::Key key_;
  std::uint32_t lane_;
  std::uint32_t sub_lo_;
  std::uint32_t sub_hi_;
  std::uint32_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int index_ = 2;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace benford
