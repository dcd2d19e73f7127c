#include "eiprobe/datasets.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include "eiprobe/errors.hpp"
#include "eiprobe/random.hpp"

namespace eiprobe {

void Dataset::validate() const {
  if (features.rows() != targets.rows()) {
    throw DimensionError("dataset has " + std::to_string(features.rows()) + " feature rows but " +
                         std::to_string(targets.rows()) + " target rows");
  }
  if (targets.cols() != class_count) {
    throw DimensionError("target width does not match the class count");
  }
  for (double v : features.values()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DomainError("feature value outside [0,1] in dataset '" + name + "'");
    }
  }
  for (std::size_t r = 0; r < targets.rows(); ++r) {
    std::size_t ones = 0;
    for (double v : targets.row(r)) {
      if (v == 1.0) {
        ++ones;
      } else if (v != 0.0) {
        ones = 2;
      }
    }
    if (ones != 1) {
      throw DomainError("target row " + std::to_string(r) + " is not one-hot");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out{Matrix(rows.size(), features.cols()), Matrix(rows.size(), targets.cols()),
              class_count, name};
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= size()) {
      throw DimensionError("subset row " + std::to_string(rows[k]) + " out of range");
    }
    std::ranges::copy(features.row(rows[k]), out.features.row(k).begin());
    std::ranges::copy(targets.row(rows[k]), out.targets.row(k).begin());
  }
  return out;
}

void scale_columns(Matrix& m) {
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      lo = std::min(lo, m(r, c));
      hi = std::max(hi, m(r, c));
    }
    for (std::size_t r = 0; r < m.rows(); ++r) {
      m(r, c) = hi > lo ? (m(r, c) - lo) / (hi - lo) : 0.0;
    }
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) {
      return out;
    }
    start = comma + 1;
  }
}

bool parse_number(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') {
    s.remove_prefix(1);
  }
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

int iris_class(std::string_view label) {
  static constexpr std::array<std::array<std::string_view, 3>, 3> names{{
      {"Iris-setosa", "setosa", "0"},
      {"Iris-versicolor", "versicolor", "1"},
      {"Iris-virginica", "virginica", "2"},
  }};
  for (int c = 0; c < 3; ++c) {
    for (auto n : names[c]) {
      if (label == n) {
        return c;
      }
    }
  }
  return -1;
}

std::string at(std::size_t line, std::size_t col) {
  return "row " + std::to_string(line) + " column " + std::to_string(col);
}

} // namespace

Dataset parse_iris(std::istream& in) {
  std::vector<double> feats;
  std::vector<int> labels;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) {
      continue;
    }
    const auto fields = split_commas(line);
    double v = 0.0;
    if (first && !parse_number(fields.front(), v)) {
      first = false;
      continue; // header
    }
    first = false;
    if (fields.size() != 5) {
      throw ParseError("iris: expected 5 columns, found " + std::to_string(fields.size()) +
                           " in row " + std::to_string(lineno),
                       lineno);
    }
    for (std::size_t c = 0; c < 4; ++c) {
      if (!parse_number(fields[c], v)) {
        throw ParseError("iris: unparseable number '" + std::string(fields[c]) + "' at " +
                             at(lineno, c + 1),
                         lineno);
      }
      feats.push_back(v);
    }
    const int cls = iris_class(fields[4]);
    if (cls < 0) {
      throw ParseError("iris: unknown class label '" + std::string(fields[4]) + "' at " +
                           at(lineno, 5),
                       lineno);
    }
    labels.push_back(cls);
  }
  if (labels.empty()) {
    throw EmptyDataError("iris: no data rows");
  }
  Dataset ds{Matrix(labels.size(), 4, std::move(feats)), Matrix(labels.size(), 3, 0.0), 3,
             "iris"};
  scale_columns(ds.features);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    ds.targets(r, static_cast<std::size_t>(labels[r])) = 1.0;
  }
  return ds;
}

Dataset load_iris(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open iris file '" + path.string() + "'");
  }
  try {
    return parse_iris(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset,
                        const char* what) {
  if (bytes.size() < offset + 4) {
    throw ParseError(std::string("truncated IDX header reading ") + what, bytes.size());
  }
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void check_magic(std::span<const std::uint8_t> bytes, std::uint32_t expected) {
  const std::uint32_t magic = read_be32(bytes, 0, "magic number");
  if (magic != expected) {
    std::ostringstream msg;
    msg << "bad IDX magic 0x" << std::hex << magic << ", expected 0x" << expected;
    throw ParseError(msg.str(), 0);
  }
}

void check_payload(std::span<const std::uint8_t> bytes, std::size_t header, std::uint64_t need) {
  const std::uint64_t have = bytes.size() - header;
  if (have < need) {
    throw ParseError("truncated IDX payload: expected " + std::to_string(need) + " bytes, found " +
                         std::to_string(have),
                     bytes.size());
  }
  if (have > need) {
    throw ParseError("trailing bytes after IDX payload", header + need);
  }
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "'");
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

IdxImages parse_idx_images(std::span<const std::uint8_t> bytes) {
  check_magic(bytes, kIdxImagesMagic);
  IdxImages out;
  out.count = read_be32(bytes, 4, "image count");
  out.rows = read_be32(bytes, 8, "row count");
  out.cols = read_be32(bytes, 12, "column count");
  const std::uint64_t need = std::uint64_t{out.count} * out.rows * out.cols;
  check_payload(bytes, 16, need);
  out.pixels.assign(bytes.begin() + 16, bytes.end());
  return out;
}

std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes) {
  check_magic(bytes, kIdxLabelsMagic);
  const std::uint32_t count = read_be32(bytes, 4, "label count");
  check_payload(bytes, 8, count);
  return {bytes.begin() + 8, bytes.end()};
}

IdxImages read_idx_images(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return parse_idx_images(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return parse_idx_labels(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

namespace {

// Overlap, in units of 1/(src*dst) of the side, between target cell t and
// source pixel s. Source pixels span dst units and target cells src units.
std::size_t overlap(std::size_t t, std::size_t s, std::size_t src, std::size_t dst) {
  const std::size_t lo = std::max(t * src, s * dst);
  const std::size_t hi = std::min((t + 1) * src, (s + 1) * dst);
  return hi > lo ? hi - lo : 0;
}

template <typename T>
std::vector<double> resize_impl(std::span<const T> image, std::size_t src, std::size_t dst,
                                double divisor) {
  if (dst == 0 || src < dst || image.size() != src * src) {
    throw DimensionError("resize_area needs a square source image no smaller than the target");
  }
  std::vector<double> out(dst * dst, 0.0);
  for (std::size_t ty = 0; ty < dst; ++ty) {
    for (std::size_t tx = 0; tx < dst; ++tx) {
      double acc = 0.0;
      for (std::size_t sy = ty * src / dst; sy < src && sy * dst < (ty + 1) * src; ++sy) {
        const std::size_t wy = overlap(ty, sy, src, dst);
        for (std::size_t sx = tx * src / dst; sx < src && sx * dst < (tx + 1) * src; ++sx) {
          const std::size_t w = wy * overlap(tx, sx, src, dst);
          acc += static_cast<double>(w) * static_cast<double>(image[sy * src + sx]);
        }
      }
      out[ty * dst + tx] = acc / (static_cast<double>(src * src) * divisor);
    }
  }
  return out;
}

} // namespace

std::vector<double> resize_area(std::span<const double> image, std::size_t src, std::size_t dst) {
  return resize_impl(image, src, dst, 1.0);
}

Dataset mnist5_from_idx(const IdxImages& images, std::span<const std::uint8_t> labels) {
  if (images.count != labels.size()) {
    throw ParseError("image count " + std::to_string(images.count) +
                         " does not match label count " + std::to_string(labels.size()),
                     4);
  }
  if (images.rows != images.cols || images.rows < kMnist5Side) {
    throw DimensionError("mnist images must be square and at least 5x5");
  }
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] < kMnist5Classes) {
      keep.push_back(k);
    }
  }
  constexpr std::size_t width = kMnist5Side * kMnist5Side;
  Dataset ds{Matrix(keep.size(), width), Matrix(keep.size(), kMnist5Classes, 0.0),
             kMnist5Classes, "mnist5"};
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const auto small = resize_impl(images.image(keep[r]), images.rows, kMnist5Side, 255.0);
    std::ranges::copy(small, ds.features.row(r).begin());
    ds.targets(r, labels[keep[r]]) = 1.0;
  }
  return ds;
}

Dataset load_mnist5(const std::filesystem::path& images_path,
                    const std::filesystem::path& labels_path) {
  const auto images = read_idx_images(images_path);
  const auto labels = read_idx_labels(labels_path);
  try {
    return mnist5_from_idx(images, labels);
  } catch (const ParseError& e) {
    throw ParseError(labels_path.string() + ": " + e.what(), e.offset());
  }
}

void SplitSpec::validate() const {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test fraction must lie in (0,1), got " + std::to_string(test_fraction));
  }
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
split_indices(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  const auto n_test = static_cast<std::size_t>(std::llround(spec.test_fraction * n));
  if (n_test == 0 || n_test == n) {
    throw ConfigError("test fraction " + std::to_string(spec.test_fraction) + " on " +
                      std::to_string(n) + " rows leaves an empty part");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  StreamEngine rng(spec.seed, streams::kSplit);
  shuffle_in_place(std::span<std::size_t>(idx), rng);
  std::vector<std::size_t> test(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  return {std::move(train), std::move(test)};
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, const SplitSpec& spec) {
  const auto [train, test] = split_indices(ds.size(), spec);
  return {ds.subset(train), ds.subset(test)};
}

} // namespace eiprobe
