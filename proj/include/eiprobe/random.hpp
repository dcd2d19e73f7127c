#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace eiprobe {

// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

// 53 random bits mapped onto [0,1).
constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Counter-based random stream: value `index` of stream `stream` under `seed`
// is a pure function of the triple. Any partition of the index range across
// workers therefore sees exactly the same numbers, and a stream of length 2s
// extends the stream of length s.
class CounterStream {
public:
  CounterStream(std::uint64_t seed, std::uint64_t stream)
      : base_(mix64(seed ^ mix64(stream + 0x6a09e667f3bcc909ULL))) {}

  std::uint64_t bits(std::uint64_t index) const {
    return mix64(base_ + (index + 1) * kGoldenGamma);
  }
  double uniform(std::uint64_t index) const { return to_unit(bits(index)); }

private:
  std::uint64_t base_;
};

// Sequential generator over a CounterStream; models UniformRandomBitGenerator.
class StreamEngine {
public:
  using result_type = std::uint64_t;

  StreamEngine(std::uint64_t seed, std::uint64_t stream) : stream_(seed, stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return stream_.bits(next_++); }
  double uniform() { return to_unit((*this)()); }

  // Unbiased integer in [0, bound) (Lemire's multiply-and-reject).
  std::uint64_t below(std::uint64_t bound) {
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Standard normal via Box-Muller (one value per call).
  double normal();

private:
  CounterStream stream_;
  std::uint64_t next_ = 0;
};

// Stream identifiers for non-measurement randomness, kept apart from the
// small integers used by perturbation streams.
namespace streams {
inline constexpr std::uint64_t kInit = 0x1000'0000'0000ULL;
inline constexpr std::uint64_t kShuffle = 0x2000'0000'0000ULL;
inline constexpr std::uint64_t kSplit = 0x3000'0000'0000ULL;
} // namespace streams

template <typename T>
void shuffle_in_place(std::span<T> items, StreamEngine& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

} // namespace eiprobe
