#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "eiprobe/network.hpp"

namespace eiprobe {

// Binary weight file, all integers and floats little-endian:
//
//   offset  size  field
//   0       8     magic "EIPROBE\0"
//   8       4     u32 format version (kWeightFormatVersion)
//   12      4     u32 layer count L
//   then L times:
//           4     u32 fan_out
//           4     u32 fan_in
//           1     u8 activation tag (0 sigmoid, 1 tanh, 2 relu)
//           8*n   f64 weights, row-major (fan_out x fan_in), n = fan_out*fan_in
//
// No trailing bytes are allowed.
inline constexpr std::uint32_t kWeightFormatVersion = 1;

std::vector<std::uint8_t> encode_weights(const Network& net);
Network decode_weights(std::span<const std::uint8_t> bytes);

void save_weights(const Network& net, const std::filesystem::path& path);
Network load_weights(const std::filesystem::path& path);

} // namespace eiprobe
