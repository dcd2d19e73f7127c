#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "eiprobe/binning.hpp"

namespace eiprobe {

// Contribution of one occupied cell to the plug-in mutual information:
// p(x,y) log2(p(x,y) / (p(x) p(y))) with p = count / total.
inline double mi_term(std::uint64_t joint, std::uint64_t x, std::uint64_t y, std::uint64_t total) {
  const double c = static_cast<double>(joint);
  const double n = static_cast<double>(total);
  return (c / n) * std::log2((c * n) / (static_cast<double>(x) * static_cast<double>(y)));
}

// Sparse joint histogram over (x_key, y_key) pairs.
//
// Samples are buffered and folded into a sorted cell list in batches, so
// memory tracks the number of distinct occupied cells rather than the
// sample count. Cells are visited in ascending (x, y) order, which makes the
// MI sum independent of how samples were sharded or merged.
//
// Const queries may fold pending samples; a histogram must not be read from
// several threads at once without external synchronization.
class JointHistogram {
public:
  struct Cell {
    StateKey x;
    StateKey y;
    std::uint64_t count;
  };

  void add(StateKey x, StateKey y);
  void add(StateKey x, StateKey y, std::uint64_t count);
  void merge(const JointHistogram& other);

  std::uint64_t total() const { return total_; }
  std::uint64_t count(StateKey x, StateKey y) const;
  std::uint64_t x_count(StateKey x) const;
  std::uint64_t y_count(StateKey y) const;
  std::size_t cell_count() const;

  // Occupied cells in ascending (x, y) order.
  const std::vector<Cell>& cells() const;

  // Plug-in entropies in bits.
  double entropy_x() const;
  double entropy_y() const;
  double entropy_joint() const;

  template <typename Fn>
  void for_each_cell(Fn&& fn) const; // fn(joint, x_marginal, y_marginal)

private:
  struct Pending {
    StateKey x;
    StateKey y;
    std::uint64_t count;
  };
  struct Marginal {
    StateKey key;
    std::uint64_t count;
  };

  void fold() const;
  void build_marginals() const;
  std::uint64_t lookup(const std::vector<Marginal>& m, StateKey key) const;

  mutable std::vector<Cell> cells_;
  mutable std::vector<Pending> pending_;
  mutable std::vector<Marginal> x_marg_;
  mutable std::vector<Marginal> y_marg_;
  mutable bool marginals_valid_ = true;
  std::uint64_t total_ = 0;
};

// Dense (x_bins x y_bins) count table for scalar node pairs.
class PairHistogram {
public:
  PairHistogram() = default;
  PairHistogram(std::size_t x_bins, std::size_t y_bins)
      : x_bins_(x_bins), y_bins_(y_bins), counts_(x_bins * y_bins, 0) {}

  void add(std::size_t x, std::size_t y) {
    ++counts_[x * y_bins_ + y];
    ++total_;
  }
  void merge(const PairHistogram& other);

  std::size_t x_bins() const { return x_bins_; }
  std::size_t y_bins() const { return y_bins_; }
  std::uint64_t total() const { return total_; }
  std::uint64_t count(std::size_t x, std::size_t y) const { return counts_[x * y_bins_ + y]; }

  template <typename Fn>
  void for_each_cell(Fn&& fn) const; // fn(joint, x_marginal, y_marginal), row-major

private:
  std::size_t x_bins_ = 0;
  std::size_t y_bins_ = 0;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

// Plug-in MI in bits; throws DomainError for an empty histogram.
double mutual_information(const JointHistogram& h);
double mutual_information(const PairHistogram& h);

template <typename Fn>
void JointHistogram::for_each_cell(Fn&& fn) const {
  fold();
  build_marginals();
  std::size_t xi = 0;
  for (const auto& c : cells_) {
    while (x_marg_[xi].key != c.x) {
      ++xi;
    }
    fn(c.count, x_marg_[xi].count, lookup(y_marg_, c.y));
  }
}

template <typename Fn>
void PairHistogram::for_each_cell(Fn&& fn) const {
  std::vector<std::uint64_t> rows(x_bins_, 0), cols(y_bins_, 0);
  for (std::size_t x = 0; x < x_bins_; ++x) {
    for (std::size_t y = 0; y < y_bins_; ++y) {
      rows[x] += count(x, y);
      cols[y] += count(x, y);
    }
  }
  for (std::size_t x = 0; x < x_bins_; ++x) {
    for (std::size_t y = 0; y < y_bins_; ++y) {
      if (const auto c = count(x, y); c != 0) {
        fn(c, rows[x], cols[y]);
      }
    }
  }
}

} // namespace eiprobe
