#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "eiprobe/activation.hpp"

namespace eiprobe {

// Mixed-radix joint-state key. 128 bits bound joint layers to
// bins^width <= 2^128 (e.g. 42 nodes at 8 bins).
using StateKey = unsigned __int128;

// Equal-width bins over a fixed interval; values outside are clipped into
// the edge bins and `hi` itself belongs to the top bin.
struct BinningScheme {
  std::size_t bins = 8;
  Interval range{0.0, 1.0};

  BinningScheme() = default;
  BinningScheme(std::size_t bins_, Interval range_);

  double width() const { return range.width() / static_cast<double>(bins); }

  // Hot-path binning; assumes `v` is finite.
  std::size_t index(double v) const {
    const double t = (v - range.lo) * scale_;
    if (!(t > 0.0)) {
      return 0;
    }
    const auto i = static_cast<std::size_t>(t);
    return i < bins ? i : bins - 1;
  }

private:
  double scale_ = 8.0;
};

// Checked binning; throws DomainError for non-finite `v`.
std::size_t bin_value(double v, const BinningScheme& scheme);

// True when every key of a `width`-node joint state with `bins` bins per
// node fits into StateKey.
bool joint_key_fits(std::size_t bins, std::size_t width);

// sum_k idx[k] * bins^k. Throws CapacityError when the key space exceeds
// StateKey and DomainError for an out-of-range index.
StateKey joint_state_encode(std::span<const std::size_t> bin_indices, std::size_t bins);

} // namespace eiprobe
