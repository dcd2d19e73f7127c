#include "eiprobe/binning.hpp"

#include <limits>
#include <string>

namespace eiprobe {

BinningScheme::BinningScheme(std::size_t bins_, Interval range_)
    : bins(bins_), range(range_) {
  if (bins < 1) {
    throw ConfigError("bin count must be at least 1");
  }
  if (!(range.hi > range.lo) || !std::isfinite(range.lo) || !std::isfinite(range.hi)) {
    throw ConfigError("binning range must be a finite interval with hi > lo");
  }
  scale_ = static_cast<double>(bins) / range.width();
}

std::size_t bin_value(double v, const BinningScheme& scheme) {
  if (!std::isfinite(v)) {
    throw DomainError("cannot bin a non-finite value");
  }
  return scheme.index(v);
}

bool joint_key_fits(std::size_t bins, std::size_t width) {
  if (bins <= 1 || width == 0) {
    return true;
  }
  constexpr StateKey kMax = ~StateKey{0};
  // Largest key is bins^width - 1; build bins^(width-1) and check the last
  // multiplication without forming bins^width itself.
  StateKey place = 1;
  for (std::size_t k = 0; k + 1 < width; ++k) {
    if (place > kMax / bins) {
      return false;
    }
    place *= bins;
  }
  // place * bins - 1 <= kMax  <=>  place * (bins - 1) <= kMax - (place - 1)
  if (place > kMax / (bins - 1)) {
    return false;
  }
  return place * (bins - 1) <= kMax - (place - 1);
}

StateKey joint_state_encode(std::span<const std::size_t> bin_indices, std::size_t bins) {
  if (!joint_key_fits(bins, bin_indices.size())) {
    throw CapacityError("joint state of " + std::to_string(bin_indices.size()) + " nodes at " +
                        std::to_string(bins) + " bins exceeds the 128-bit key capacity");
  }
  StateKey key = 0;
  StateKey place = 1;
  for (std::size_t k = 0; k < bin_indices.size(); ++k) {
    if (bin_indices[k] >= bins) {
      throw DomainError("bin index " + std::to_string(bin_indices[k]) + " out of range at node " +
                        std::to_string(k));
    }
    key += place * bin_indices[k];
    if (k + 1 < bin_indices.size()) {
      place *= bins;
    }
  }
  return key;
}

} // namespace eiprobe
