#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eiprobe/matrix.hpp"

namespace eiprobe {

struct Dataset {
  Matrix features; // rows = examples, values in [0,1]
  Matrix targets;  // one-hot
  std::size_t class_count = 0;
  std::string name;

  std::size_t size() const { return features.rows(); }
  void validate() const;
  Dataset subset(std::span<const std::size_t> rows) const;
};

// Four numeric columns then a class label (Iris-setosa / Iris-versicolor /
// Iris-virginica, the short names, or 0/1/2). A non-numeric first row is
// taken as a header. Features are min-max scaled per column over the whole
// file. Errors are ParseError with offset = 1-based line number.
Dataset parse_iris(std::istream& in);
Dataset load_iris(const std::filesystem::path& path);

// Min-max scale every column to [0,1]; constant columns become 0.
void scale_columns(Matrix& m);

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

struct IdxImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels; // count * rows * cols, row-major per image

  std::span<const std::uint8_t> image(std::size_t k) const {
    return {pixels.data() + k * rows * cols, rows * cols};
  }
};

// Errors are ParseError with offset = byte position of the fault.
IdxImages parse_idx_images(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes);
IdxImages read_idx_images(const std::filesystem::path& path);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);

// Area-weighted downsampling of a src x src image to dst x dst. Every target
// cell is the covered-area-weighted mean of the source pixels under it.
std::vector<double> resize_area(std::span<const double> image, std::size_t src, std::size_t dst);

inline constexpr std::size_t kMnist5Side = 5;
inline constexpr std::size_t kMnist5Classes = 5;

// Keeps digits 0-4, area-resizes each image to 5x5, scales to [0,1].
Dataset mnist5_from_idx(const IdxImages& images, std::span<const std::uint8_t> labels);
Dataset load_mnist5(const std::filesystem::path& images_path,
                    const std::filesystem::path& labels_path);

struct SplitSpec {
  double test_fraction = 1.0 / 3.0;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const SplitSpec&) const = default;
};

// Shuffles row indices with the split seed, then puts the first
// round(test_fraction * n) in the test part.
std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, const SplitSpec& spec);

// (train, test) row indices, each in shuffled order.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
split_indices(std::size_t n, const SplitSpec& spec);

} // namespace eiprobe
