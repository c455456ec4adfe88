#include "gpi/rng.hpp"

namespace gpi {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
  const std::uint64_t s0 = splitmix64(seed);
  const std::uint64_t s1 = splitmix64(s0 ^ splitmix64(stream_id));
  const std::uint64_t i0 = splitmix64(stream_id ^ 0xD1B54A32D192ED03ULL);
  const std::uint64_t i1 = splitmix64(i0);
  increment_ = ((static_cast<uint128>(i0) << 64) | i1) | 1U;
  // pcg setseq initialisation: step, add seed, step.
  state_ = 0;
  (*this)();
  state_ += (static_cast<uint128>(s0) << 64) | s1;
  (*this)();
}

RngStream RngStream::substream(std::uint64_t tag) const noexcept {
  const std::uint64_t child = splitmix64(splitmix64(stream_id_) ^ (tag * 0xA24BAED4963EE407ULL + 0x9FB21C651E98DF25ULL));
  return {seed_, child};
}

}  // namespace gpi
