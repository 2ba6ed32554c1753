#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace gibbslab {

// Counter-based random stream (Philox4x32-10). A stream is fully determined
// by (seed, stream_id): the same pair always reproduces the same draws, and
// distinct stream_ids index disjoint counter blocks of the same keyed
// permutation, so they can be consumed in any order (or concurrently) without
// affecting each other. Trial t of a Monte-Carlo sweep uses substream(t).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_(stream_id) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  // Stream used for unit-of-work `offset` under the same seed. Callers are
  // responsible for spacing base stream ids so ranges do not overlap.
  RngStream substream(std::uint64_t offset) const {
    return RngStream(seed_, stream_ + offset);
  }

  std::uint32_t next_u32() {
    if (pos_ == 4) refill();
    return buf_[pos_++];
  }

  std::uint64_t next_u64() {
    std::uint64_t lo = next_u32();
    std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
  }

  // Uniform in [0, 1), 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  // Implemented by hand so that draws are identical across platforms and
  // standard libraries.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * kPi * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

  // Uniform over {-1, +1}.
  int rademacher() { return (next_u64() >> 63) ? 1 : -1; }

 private:
  static constexpr double kPi = 3.14159265358979323846;

  void refill() {
    std::array<std::uint32_t, 4> c = {
        static_cast<std::uint32_t>(block_),
        static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(stream_),
        static_cast<std::uint32_t>(stream_ >> 32)};
    std::array<std::uint32_t, 2> k = {static_cast<std::uint32_t>(seed_),
                                      static_cast<std::uint32_t>(seed_ >> 32)};
    for (int round = 0; round < 10; ++round) {
      std::uint64_t p0 = 0xD2511F53ull * c[0];
      std::uint64_t p1 = 0xCD9E8D57ull * c[2];
      c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1],
           static_cast<std::uint32_t>(p0)};
      k[0] += 0x9E3779B9u;
      k[1] += 0xBB67AE85u;
    }
    buf_ = c;
    pos_ = 0;
    ++block_;
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Spacing between base stream ids handed to independent estimator calls, so
// per-trial substreams of one call can never collide with another call's.
inline constexpr std::uint64_t kStreamSpacing = std::uint64_t(1) << 40;

}  // namespace gibbslab
