#include "eiprobe/weights_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace eiprobe {

namespace {

constexpr char kMagic[8] = {'E', 'I', 'P', 'R', 'O', 'B', 'E', '\0'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
}

class Reader {
public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw ParseError(std::string("truncated weight file while reading ") + what, pos_);
    }
  }

  std::uint8_t u8(const char* what) {
    need(1, what);
    return bytes_[pos_++];
  }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  double f64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    }
    pos_ += 8;
    return std::bit_cast<double>(v);
  }

  bool at_end() const { return pos_ == bytes_.size(); }

private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

} // namespace

std::vector<std::uint8_t> encode_weights(const Network& net) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, kWeightFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(net.depth()));
  for (const auto& layer : net.layers()) {
    put_u32(out, static_cast<std::uint32_t>(layer.fan_out()));
    put_u32(out, static_cast<std::uint32_t>(layer.fan_in()));
    out.push_back(static_cast<std::uint8_t>(layer.activation));
    for (double v : layer.weights.values()) {
      put_f64(out, v);
    }
  }
  return out;
}

Network decode_weights(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  in.need(sizeof(kMagic), "magic");
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("bad magic: not an EIPROBE weight file", 0);
  }
  for (std::size_t i = 0; i < sizeof(kMagic); ++i) {
    in.u8("magic");
  }
  const std::size_t version_at = in.offset();
  const std::uint32_t version = in.u32("version");
  if (version != kWeightFormatVersion) {
    throw UnsupportedVersionError("unsupported weight file version " + std::to_string(version) +
                                  " at offset " + std::to_string(version_at) + " (expected " +
                                  std::to_string(kWeightFormatVersion) + ")");
  }
  const std::uint32_t count = in.u32("layer count");
  std::vector<DenseLayer> layers;
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::size_t layer_at = in.offset();
    const std::uint32_t fan_out = in.u32("fan_out");
    const std::uint32_t fan_in = in.u32("fan_in");
    if (fan_out == 0 || fan_in == 0) {
      throw ParseError("layer " + std::to_string(k) + " has a zero dimension", layer_at);
    }
    const std::size_t tag_at = in.offset();
    const std::uint8_t tag = in.u8("activation tag");
    if (tag > static_cast<std::uint8_t>(Activation::Relu)) {
      throw ParseError("unknown activation tag " + std::to_string(tag), tag_at);
    }
    const std::uint64_t n = static_cast<std::uint64_t>(fan_out) * fan_in;
    in.need(n * 8, "weights");
    std::vector<double> w(n);
    for (auto& v : w) {
      v = in.f64("weights");
    }
    layers.push_back({Matrix(fan_out, fan_in, std::move(w)), static_cast<Activation>(tag)});
  }
  if (!in.at_end()) {
    throw ParseError("trailing bytes after last layer", in.offset());
  }
  try {
    return Network(std::move(layers));
  } catch (const Error& e) {
    throw ParseError(std::string("inconsistent network: ") + e.what(), bytes.size());
  }
}

void save_weights(const Network& net, const std::filesystem::path& path) {
  const auto bytes = encode_weights(net);
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error("failed writing '" + path.string() + "'");
  }
}

Network load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open weight file '" + path.string() + "'");
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_weights(bytes);
}

} // namespace eiprobe
