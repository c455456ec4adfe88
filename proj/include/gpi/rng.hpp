#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace gpi {

__extension__ using uint128 = unsigned __int128;

/// Seeded random stream built on PCG64 (XSL-RR output over a 128-bit LCG).
///
/// A stream is identified by (seed, stream_id). Both are hashed through
/// SplitMix64 into the LCG state and its odd increment, so distinct ids select
/// distinct LCG sequences. substream() derives a child id from the parent id
/// and a tag; every replicate in a parallel loop gets its own child, which is
/// what keeps serial and OpenMP runs bit-identical.
///
/// Satisfies UniformRandomBitGenerator, so it plugs into Boost.Random
/// distributions.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Child stream; does not advance this stream.
  [[nodiscard]] RngStream substream(std::uint64_t tag) const noexcept;

  result_type operator()() noexcept {
    state_ = state_ * kMultiplier + increment_;
    const auto hi = static_cast<std::uint64_t>(state_ >> 64);
    const auto lo = static_cast<std::uint64_t>(state_);
    const unsigned rot = static_cast<unsigned>(state_ >> 122);
    const std::uint64_t x = hi ^ lo;
    return (x >> rot) | (x << ((64U - rot) & 63U));
  }

  /// Uniform integer in [0, bound), bound > 0 (Lemire's multiply-shift with
  /// rejection, so the result is exactly uniform).
  std::uint64_t uniform_index(std::uint64_t bound) noexcept {
    uint128 m = static_cast<uint128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<uint128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  static constexpr std::string_view generator_id() noexcept {
    return "pcg64-xsl-rr-128/64 + splitmix64 substreams";
  }

 private:
  static constexpr uint128 kMultiplier =
      (static_cast<uint128>(2549297995355413924ULL) << 64) + 4865540595714422341ULL;

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  uint128 state_{};
  uint128 increment_{};
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace gpi
