#pragma once

// Philox4x64-10 counter-based generator (Salmon et al., SC'11) and the
// keyed normal substreams built on it. A draw depends only on
// (seed, counter), never on call order, so parallel schedules reproduce
// serial results bit for bit.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace qspr {

class Philox4x64 {
 public:
  using counter_type = std::array<std::uint64_t, 4>;
  using key_type = std::array<std::uint64_t, 2>;

  static constexpr int kRounds = 10;

  static constexpr counter_type generate(counter_type ctr, key_type key) {
    for (int round = 0; round < kRounds; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
  static constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
  static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

  static constexpr void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
    const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
  }

  static constexpr counter_type single_round(const counter_type& c, const key_type& k) {
    std::uint64_t hi0 = 0, lo0 = 0, hi1 = 0, lo1 = 0;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Uniform in [0, 1) with 53 random bits.
inline double uniform_closed_open(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Uniform in (0, 1], safe for log().
inline double uniform_open_closed(std::uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

/// Standard normal from one Philox block: Box-Muller on words 0 and 1,
/// cosine branch only. The algorithm is pinned; changing it changes every
/// simulated sensorgram.
inline double standard_normal(const Philox4x64::counter_type& block) {
  const double u1 = uniform_open_closed(block[0]);
  const double u2 = uniform_closed_open(block[1]);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Independent stream for one sensorgram of one Monte Carlo set. The
/// counter is (time index, sensorgram, set, purpose) under key (seed, tag).
struct Substream {
  static constexpr std::uint64_t kKeyTag = 0x5350524B494E4554ULL;

  std::uint64_t seed = 0;
  std::uint64_t set = 0;
  std::uint64_t sensorgram = 0;
  std::uint64_t purpose = 0;

  Philox4x64::counter_type block(std::uint64_t index) const {
    return Philox4x64::generate({index, sensorgram, set, purpose}, {seed, kKeyTag});
  }
  double normal(std::uint64_t index) const { return standard_normal(block(index)); }
  double uniform(std::uint64_t index) const { return uniform_closed_open(block(index)[0]); }
};

}  // namespace qspr
