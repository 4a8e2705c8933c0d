#pragma once

#include <cassert>
#include <cstdint>

namespace bam {

// SplitMix64 (Steele, Lea & Flood 2014), the mixer behind
// java.util.SplittableRandom. State advances by a fixed odd increment and
// every output is a bijective mix of the counter, so streams seeded from
// distinct values never share state.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1) with 53 random bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_double() < p; }

  // Unbiased uniform integer in [0, bound), bound >= 1, by rejection.
  std::uint64_t next_below(std::uint64_t bound) {
    assert(bound >= 1);
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  std::uint64_t state_;
};

enum class StreamKind : std::uint8_t {
  pattern_set = 1,
  content_set = 2,
  query = 3,
  target_pick = 4,
  pattern_row = 5,
};

namespace detail {
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace detail

// Derives the seed of a sub-stream from (master seed, kind, indices).
// The indices are bit-packed into one word (kind < 2^8, a < 2^24,
// b and c < 2^16) and pass through a bijective mixer xored with a
// master-derived constant, so for a fixed master seed distinct index
// tuples always map to distinct stream seeds.
constexpr std::uint64_t derive_stream(std::uint64_t master, StreamKind kind,
                                      std::uint64_t a = 0, std::uint64_t b = 0,
                                      std::uint64_t c = 0) {
  assert(a < (1ull << 24) && b < (1ull << 16) && c < (1ull << 16));
  const std::uint64_t pack =
      (static_cast<std::uint64_t>(kind) << 56) | (a << 32) | (b << 16) | c;
  return detail::mix64(detail::mix64(master + 0x9e3779b97f4a7c15ull) ^ pack);
}

}  // namespace bam
