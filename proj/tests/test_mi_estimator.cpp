#include <doctest.h>

#include <cmath>
#include <set>

#include "eiprobe/binning.hpp"
#include "eiprobe/histogram.hpp"
#include "eiprobe/random.hpp"
#include "oracles.hpp"

using namespace eiprobe;

namespace {

using Table = std::vector<std::vector<std::uint64_t>>;

Table random_table(std::size_t rows, std::size_t cols, std::uint64_t seed, std::uint64_t max) {
  StreamEngine rng(seed, 77);
  Table t(rows, std::vector<std::uint64_t>(cols));
  for (auto& r : t) {
    for (auto& c : r) {
      c = rng.below(max + 1);
    }
  }
  t[0][0] += 1; // never empty
  return t;
}

JointHistogram joint_from(const Table& t) {
  JointHistogram h;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = 0; j < t[i].size(); ++j) {
      if (t[i][j] != 0) {
        h.add(i, j, t[i][j]);
      }
    }
  }
  return h;
}

PairHistogram pair_from(const Table& t) {
  PairHistogram h(t.size(), t[0].size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = 0; j < t[i].size(); ++j) {
      for (std::uint64_t k = 0; k < t[i][j]; ++k) {
        h.add(i, j);
      }
    }
  }
  return h;
}

Table transpose(const Table& t) {
  Table out(t[0].size(), std::vector<std::uint64_t>(t.size()));
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = 0; j < t[i].size(); ++j) {
      out[j][i] = t[i][j];
    }
  }
  return out;
}

} // namespace

TEST_CASE("bin_value edges and clipping") {
  const BinningScheme s(8, {0.0, 1.0});
  CHECK(bin_value(0.0, s) == 0);
  CHECK(bin_value(1.0, s) == 7);
  CHECK(bin_value(2.5, s) == 7);
  CHECK(bin_value(-0.3, s) == 0);
  CHECK(bin_value(0.125, s) == 1);
  CHECK(bin_value(0.1249999, s) == 0);
  CHECK(s.width() == 0.125);

  const BinningScheme t(4, {-1.0, 1.0});
  CHECK(bin_value(-1.0, t) == 0);
  CHECK(bin_value(0.0, t) == 2);
  CHECK(bin_value(0.999, t) == 3);

  CHECK_THROWS_AS(bin_value(NAN, s), DomainError);
  CHECK_THROWS_AS(bin_value(-INFINITY, s), DomainError);
  CHECK_THROWS_AS(BinningScheme(0, {0.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(BinningScheme(8, {1.0, 1.0}), ConfigError);
}

TEST_CASE("hot-path index agrees with the checked bin_value") {
  const BinningScheme s(64, {-1.0, 1.0});
  StreamEngine rng(3, 0);
  for (int k = 0; k < 10000; ++k) {
    const double v = -1.5 + 3.0 * rng.uniform();
    CHECK(s.index(v) == bin_value(v, s));
  }
}

TEST_CASE("joint_state_encode radix arithmetic") {
  const std::vector<std::size_t> zero{0, 0, 0}, a{1, 0}, b{0, 1};
  CHECK(joint_state_encode(zero, 8) == 0);
  CHECK(joint_state_encode(a, 8) == 1);
  CHECK(joint_state_encode(b, 8) == 8);

  const std::vector<std::size_t> bad{8};
  CHECK_THROWS_AS(joint_state_encode(bad, 8), DomainError);
}

TEST_CASE("joint_state_encode is injective over all 8^3 vectors") {
  std::set<StateKey> seen;
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = 0; j < 8; ++j) {
      for (std::size_t k = 0; k < 8; ++k) {
        const std::vector<std::size_t> idx{i, j, k};
        seen.insert(joint_state_encode(idx, 8));
      }
    }
  }
  CHECK(seen.size() == 512);
  CHECK(*seen.rbegin() == 511);
}

TEST_CASE("key capacity is enforced rather than wrapped") {
  CHECK(joint_key_fits(8, 42));
  CHECK_FALSE(joint_key_fits(8, 43));
  CHECK(joint_key_fits(2, 128));
  CHECK_FALSE(joint_key_fits(2, 129));
  const std::vector<std::size_t> wide(43, 7);
  CHECK_THROWS_AS(joint_state_encode(wide, 8), CapacityError);
  const std::vector<std::size_t> top(42, 7);
  CHECK(joint_state_encode(top, 8) == ~StateKey{0} >> 2);
}

TEST_CASE("histogram accumulation") {
  JointHistogram h;
  h.add(3, 5);
  CHECK(h.total() == 1);
  CHECK(h.count(3, 5) == 1);
  CHECK(h.x_count(3) == 1);
  CHECK(h.y_count(5) == 1);
  CHECK(h.count(5, 3) == 0);

  JointHistogram big;
  StreamEngine rng(1, 0);
  for (int k = 0; k < 1'000'000; ++k) {
    big.add(rng.below(8), rng.below(8));
  }
  CHECK(big.total() == 1'000'000);
  std::uint64_t sum = 0;
  for (const auto& c : big.cells()) {
    sum += c.count;
    CHECK(c.count <= big.total());
  }
  CHECK(sum == big.total());
  for (StateKey x = 0; x < 8; ++x) {
    std::uint64_t row = 0;
    for (StateKey y = 0; y < 8; ++y) {
      row += big.count(x, y);
    }
    CHECK(row == big.x_count(x));
  }
}

TEST_CASE("merged shards equal a single pass") {
  StreamEngine rng(9, 0);
  std::vector<std::pair<StateKey, StateKey>> stream;
  for (int k = 0; k < 50'000; ++k) {
    stream.emplace_back(rng.below(20), rng.below(7));
  }
  JointHistogram whole, a, b, c;
  PairHistogram pw(20, 7), pa(20, 7), pb(20, 7);
  for (std::size_t k = 0; k < stream.size(); ++k) {
    const auto [x, y] = stream[k];
    whole.add(x, y);
    pw.add(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
    (k < 10'000 ? a : k < 31'000 ? b : c).add(x, y);
    (k < 17'000 ? pa : pb).add(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
  }
  a.merge(b);
  a.merge(c);
  pa.merge(pb);
  CHECK(a.total() == whole.total());
  CHECK(a.cells().size() == whole.cells().size());
  for (std::size_t k = 0; k < a.cells().size(); ++k) {
    CHECK(a.cells()[k].count == whole.cells()[k].count);
  }
  CHECK(mutual_information(a) == mutual_information(whole));
  CHECK(mutual_information(pa) == mutual_information(pw));
}

TEST_CASE("mutual information reference values") {
  SUBCASE("Y = X uniform over 8 bins gives 3 bits") {
    JointHistogram h;
    PairHistogram p(8, 8);
    for (int rep = 0; rep < 100; ++rep) {
      for (std::size_t x = 0; x < 8; ++x) {
        h.add(x, x);
        p.add(x, x);
      }
    }
    CHECK(mutual_information(h) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(mutual_information(p) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(h.entropy_x() == doctest::Approx(3.0).epsilon(1e-15));
  }
  SUBCASE("constant variables give 0") {
    JointHistogram h;
    h.add(2, 6, 1000);
    CHECK(mutual_information(h) == 0.0);
  }
  SUBCASE("empty histogram") {
    CHECK_THROWS_AS(mutual_information(JointHistogram{}), DomainError);
    CHECK_THROWS_AS(mutual_information(PairHistogram(4, 4)), DomainError);
  }
}

TEST_CASE("plug-in MI matches a direct summation oracle on random tables") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    CAPTURE(seed);
    const std::size_t rows = 2 + seed % 5;
    const std::size_t cols = 2 + (seed / 5) % 5;
    const Table t = random_table(rows, cols, seed, seed % 3 == 0 ? 3 : 40);
    const double expected = oracle::mutual_information(t);
    CHECK(std::abs(mutual_information(joint_from(t)) - expected) < 1e-12);
    CHECK(std::abs(mutual_information(pair_from(t)) - expected) < 1e-12);
  }
  const Table four = random_table(4, 4, 2024, 100);
  CHECK(std::abs(mutual_information(joint_from(four)) - oracle::mutual_information(four)) < 1e-12);
}

TEST_CASE("MI properties: non-negative, bounded by entropies, symmetric") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    CAPTURE(seed);
    const Table t = random_table(1 + seed % 6, 1 + seed % 4, seed, 1 + seed % 10);
    const JointHistogram h = joint_from(t);
    const double mi = mutual_information(h);
    CHECK(mi >= 0.0);
    CHECK(mi <= std::min(h.entropy_x(), h.entropy_y()) + 1e-12);
    CHECK(std::abs(mi - mutual_information(joint_from(transpose(t)))) < 1e-12);
    CHECK(std::abs(mi - (h.entropy_x() + h.entropy_y() - h.entropy_joint())) < 1e-12);
  }
}

TEST_CASE("wide 128-bit keys are stored without truncation") {
  JointHistogram h;
  const StateKey big = StateKey{1} << 100;
  h.add(big, 1);
  h.add(big + 1, 1);
  h.add(1, big);
  CHECK(h.count(big, 1) == 1);
  CHECK(h.count(big + 1, 1) == 1);
  CHECK(h.count(0, 1) == 0);
  CHECK(h.y_count(big) == 1);
  CHECK(h.cell_count() == 3);
}
