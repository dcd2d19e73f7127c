#include "eiprobe/histogram.hpp"

#include <algorithm>

namespace eiprobe {

namespace {

constexpr std::size_t kFoldBatch = std::size_t{1} << 20;

template <typename T>
bool key_less(const T& a, const T& b) {
  return a.x < b.x || (a.x == b.x && a.y < b.y);
}

double entropy_of(const auto& counts, std::uint64_t total) {
  if (total == 0) {
    throw DomainError("entropy of an empty histogram");
  }
  const double n = static_cast<double>(total);
  double h = 0.0;
  for (const auto& c : counts) {
    const double p = static_cast<double>(c.count) / n;
    h -= p * std::log2(p);
  }
  return h;
}

} // namespace

void JointHistogram::add(StateKey x, StateKey y) { add(x, y, 1); }

void JointHistogram::add(StateKey x, StateKey y, std::uint64_t count) {
  if (count == 0) {
    return;
  }
  pending_.push_back({x, y, count});
  total_ += count;
  marginals_valid_ = false;
  if (pending_.size() >= std::max(kFoldBatch, cells_.size())) {
    fold();
  }
}

void JointHistogram::merge(const JointHistogram& other) {
  other.fold();
  pending_.reserve(pending_.size() + other.cells_.size());
  for (const auto& c : other.cells_) {
    pending_.push_back({c.x, c.y, c.count});
  }
  total_ += other.total_;
  marginals_valid_ = false;
  fold();
}

void JointHistogram::fold() const {
  if (pending_.empty()) {
    return;
  }
  std::sort(pending_.begin(), pending_.end(), key_less<Pending>);

  std::vector<Cell> merged;
  merged.reserve(cells_.size() + pending_.size());
  auto push = [&merged](StateKey x, StateKey y, std::uint64_t n) {
    if (!merged.empty() && merged.back().x == x && merged.back().y == y) {
      merged.back().count += n;
    } else {
      merged.push_back({x, y, n});
    }
  };
  std::size_t i = 0, j = 0;
  while (i < cells_.size() || j < pending_.size()) {
    const bool take_cell =
        j == pending_.size() ||
        (i < cells_.size() && !key_less(pending_[j], Pending{cells_[i].x, cells_[i].y, 0}));
    if (take_cell) {
      push(cells_[i].x, cells_[i].y, cells_[i].count);
      ++i;
    } else {
      push(pending_[j].x, pending_[j].y, pending_[j].count);
      ++j;
    }
  }
  cells_ = std::move(merged);
  pending_.clear();
  marginals_valid_ = false;
}

void JointHistogram::build_marginals() const {
  fold();
  if (marginals_valid_) {
    return;
  }
  x_marg_.clear();
  for (const auto& c : cells_) {
    if (!x_marg_.empty() && x_marg_.back().key == c.x) {
      x_marg_.back().count += c.count;
    } else {
      x_marg_.push_back({c.x, c.count});
    }
  }
  std::vector<Marginal> ys;
  ys.reserve(cells_.size());
  for (const auto& c : cells_) {
    ys.push_back({c.y, c.count});
  }
  std::sort(ys.begin(), ys.end(), [](const Marginal& a, const Marginal& b) { return a.key < b.key; });
  y_marg_.clear();
  for (const auto& m : ys) {
    if (!y_marg_.empty() && y_marg_.back().key == m.key) {
      y_marg_.back().count += m.count;
    } else {
      y_marg_.push_back(m);
    }
  }
  marginals_valid_ = true;
}

std::uint64_t JointHistogram::lookup(const std::vector<Marginal>& m, StateKey key) const {
  const auto it = std::lower_bound(m.begin(), m.end(), key,
                                   [](const Marginal& a, StateKey k) { return a.key < k; });
  return it != m.end() && it->key == key ? it->count : 0;
}

std::uint64_t JointHistogram::count(StateKey x, StateKey y) const {
  fold();
  const Cell probe{x, y, 0};
  const auto it = std::lower_bound(cells_.begin(), cells_.end(), probe, key_less<Cell>);
  return it != cells_.end() && it->x == x && it->y == y ? it->count : 0;
}

std::uint64_t JointHistogram::x_count(StateKey x) const {
  build_marginals();
  return lookup(x_marg_, x);
}

std::uint64_t JointHistogram::y_count(StateKey y) const {
  build_marginals();
  return lookup(y_marg_, y);
}

std::size_t JointHistogram::cell_count() const {
  fold();
  return cells_.size();
}

const std::vector<JointHistogram::Cell>& JointHistogram::cells() const {
  fold();
  return cells_;
}

double JointHistogram::entropy_x() const {
  build_marginals();
  return entropy_of(x_marg_, total_);
}

double JointHistogram::entropy_y() const {
  build_marginals();
  return entropy_of(y_marg_, total_);
}

double JointHistogram::entropy_joint() const {
  fold();
  return entropy_of(cells_, total_);
}

void PairHistogram::merge(const PairHistogram& other) {
  if (other.x_bins_ != x_bins_ || other.y_bins_ != y_bins_) {
    throw DimensionError("cannot merge pair histograms of different shapes");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    counts_[i] += other.counts_[i];
  }
  total_ += other.total_;
}

namespace {

template <typename H>
double plug_in_mi(const H& h) {
  if (h.total() == 0) {
    throw DomainError("mutual information of an empty histogram");
  }
  double sum = 0.0;
  const std::uint64_t n = h.total();
  h.for_each_cell([&](std::uint64_t c, std::uint64_t cx, std::uint64_t cy) {
    sum += mi_term(c, cx, cy, n);
  });
  // Rounding can leave a tiny negative sum for independent variables.
  return sum > 0.0 ? sum : 0.0;
}

} // namespace

double mutual_information(const JointHistogram& h) { return plug_in_mi(h); }
double mutual_information(const PairHistogram& h) { return plug_in_mi(h); }

} // namespace eiprobe
