// rng.hpp — counter-based splittable random stream.
//
// Every draw is a pure function of (seed, stream_id, counter), so a run can
// be replayed bit for bit and independent substreams can be carved out of a
// master seed by id (trial index, vertex id, role tag) without coordination.
#pragma once

#include <bit>
#include <cstdint>

namespace rumorperc {

// MurmurHash3 64-bit finalizer: bijective avalanche mix.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 33;
  z *= 0xff51afd7ed558ccdull;
  z ^= z >> 33;
  z *= 0xc4ceb9fe1a85ec53ull;
  z ^= z >> 33;
  return z;
}

class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}

  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed),
        stream_(stream_id),
        base_(mix64(mix64(seed) + 0x9e3779b97f4a7c15ull * mix64(stream_id ^ 0x6a09e667f3bcc909ull))) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  // Derives a statistically independent stream; does not depend on how many
  // draws the parent has consumed.
  RngStream substream(std::uint64_t tag) const {
    return RngStream(seed_, mix64(stream_ ^ mix64(tag + 0xa0761d6478bd642full)));
  }

  std::uint64_t next_u64() {
    counter_ += 1;
    return mix64(base_ + counter_ * 0x9e3779b97f4a7c15ull);
  }

  // Uniform on [0, bound); bitmask rejection keeps it exact.
  std::uint64_t next_below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t mask = ~std::uint64_t{0} >> std::countl_zero(bound - 1);
    for (;;) {
      const std::uint64_t v = next_u64() & mask;
      if (v < bound) return v;
    }
  }

  // Uniform on [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe to feed into log().
  double next_unit_open() { return 1.0 - next_double(); }

  bool bernoulli(double p) { return next_double() < p; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

// Stream role tags. Chaining substream(tag).substream(index) keeps every
// consumer of randomness addressable and collision-free in practice.
namespace streams {
inline constexpr std::uint64_t kRun = 1;          // per-trial protocol runs
inline constexpr std::uint64_t kPercolation = 2;  // per-trial edge sampling
inline constexpr std::uint64_t kVertex = 3;       // per-vertex choice sequences
inline constexpr std::uint64_t kOrdering = 4;     // per-vertex neighbor orderings
inline constexpr std::uint64_t kGenerator = 5;    // graph generators
inline constexpr std::uint64_t kCheck = 6;        // verification suites
}  // namespace streams

}  // namespace rumorperc
