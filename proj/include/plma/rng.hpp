#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace plma {

// Philox4x32-10 counter-based generator (Salmon et al., Random123).
//
// A generator is identified by (seed, stream). The 128-bit Philox counter is
// laid out as {index_lo, index_hi, stream_lo, stream_hi} and the 64-bit key is
// the seed, so every (seed, stream) pair addresses a disjoint sequence of
// 2^64 blocks. Each block yields two 64-bit outputs.
//
// Streams are derived hierarchically with `derive`, which mixes a parent
// stream id with a child index. All randomness in the solver is drawn from
// streams named by what they drive (instance, chain, epoch), so results do
// not depend on how work is scheduled across threads.
class Rng {
 public:
  using result_type = std::uint64_t;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

  result_type operator()();

  // Uniform in [0, 1) with 53 random bits. Consumes one draw.
  double uniform();

  // Uniform integer in [0, bound). Consumes exactly one draw (multiply-high
  // mapping, bias below bound / 2^64).
  std::uint64_t below(std::uint64_t bound);

  // Child generator on a stream derived from this one; does not advance *this.
  Rng split(std::uint64_t child) const { return Rng(seed_, derive(stream_, child)); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t draws() const { return draws_; }

  static std::uint64_t derive(std::uint64_t parent, std::uint64_t child);
  static std::uint64_t tag(std::string_view name);

  // Raw block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> counter,
                                             std::array<std::uint32_t, 2> key);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::uint64_t draws_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

}  // namespace plma
