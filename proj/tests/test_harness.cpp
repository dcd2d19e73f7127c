#include <doctest.h>

#include <cmath>
#include <sstream>

#include "eiprobe/errors.hpp"
#include "eiprobe/harness.hpp"
#include "eiprobe/run_io.hpp"

using namespace eiprobe;

namespace {

const std::filesystem::path kData = EIPROBE_DATA_DIR;

ExperimentSpec quick_iris(std::size_t epochs = 20, std::size_t every = 10) {
  ExperimentSpec s = canonical_spec(Task::Iris, 1);
  s.train.epochs = epochs;
  s.measure_every = every;
  s.perturbation.samples = 2000;
  return s;
}

PerturbationConfig config(std::uint64_t samples, std::size_t bins, std::uint64_t seed = 1) {
  PerturbationConfig c;
  c.samples = samples;
  c.bins = bins;
  c.seed = seed;
  return c;
}

} // namespace

TEST_CASE("canonical specs") {
  const auto iris = canonical_spec(Task::Iris, 7);
  CHECK(iris.widths == std::vector<std::size_t>{4, 5, 5, 3});
  CHECK(iris.train.learning_rate == 0.01);
  CHECK(iris.train.batch_size == 10);
  CHECK(iris.train.epochs == 4000);
  CHECK(iris.train.seed == 7);
  CHECK(iris.activation == Activation::Sigmoid);
  CHECK(iris.runs == 3);
  CHECK(iris.perturbation.bins == 8);
  CHECK_NOTHROW(iris.validate());

  const auto mnist = canonical_spec(Task::Mnist5);
  CHECK(mnist.widths == std::vector<std::size_t>{25, 6, 6, 5});
  CHECK(mnist.train.learning_rate == 0.01);
  CHECK(mnist.train.batch_size == 50);
  CHECK(mnist.train.epochs == 500);
  CHECK_NOTHROW(mnist.validate());

  CHECK(parse_task("mnist5") == Task::Mnist5);
  CHECK(to_string(Task::Iris) == "iris");
  CHECK_THROWS_AS(parse_task("cifar"), ConfigError);

  auto bad = iris;
  bad.widths = {5, 5, 3};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = iris;
  bad.measure_every = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = iris;
  bad.runs = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("redundant layer variants") {
  const auto mnist = canonical_spec(Task::Mnist5);
  CHECK(redundant_layer_variant(mnist, 0) == mnist);
  CHECK(redundant_layer_variant(mnist, 2).widths == std::vector<std::size_t>{25, 6, 6, 6, 6, 5});
  CHECK(redundant_layer_variant(mnist, -1).widths == std::vector<std::size_t>{25, 6, 5});
  auto plus = redundant_layer_variant(mnist, 2);
  plus.widths = mnist.widths;
  CHECK(plus == mnist);
  CHECK_THROWS_AS(redundant_layer_variant(mnist, -2), ConfigError);
  const auto flat = redundant_layer_variant(mnist, -1);
  CHECK_THROWS_AS(redundant_layer_variant(redundant_layer_variant(flat, -1), -1), ConfigError);
  CHECK_THROWS_AS(redundant_layer_variant(redundant_layer_variant(flat, -1), 1), ConfigError);
}

TEST_CASE("task data") {
  const auto iris = load_task(canonical_spec(Task::Iris), kData);
  CHECK(iris.train.size() == 100);
  CHECK(iris.test.size() == 50);
  const auto mnist = load_task(canonical_spec(Task::Mnist5), kData);
  CHECK(mnist.train.features.cols() == 25);
  CHECK(mnist.test.class_count == 5);
  CHECK_THROWS_AS(load_task(canonical_spec(Task::Iris), kData / "nowhere"), IoError);
}

TEST_CASE("iris runs record every layer transition") {
  const auto spec = quick_iris(25, 10);
  const auto data = load_task(spec, kData);
  const auto runs = train_runs(spec, data);
  REQUIRE(runs.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& r = runs[k];
    CHECK(r.spec.train.seed == spec.train.seed + k);
    CHECK(r.spec.widths == std::vector<std::size_t>{4, 5, 5, 3});
    std::vector<std::size_t> epochs;
    for (const auto& c : r.checkpoints) {
      epochs.push_back(c.epoch);
      CHECK(c.layers.size() == 3);
      CHECK(c.weights.size() == 3);
      for (const auto& l : c.layers) {
        REQUIRE(l.ei.has_value());
        CHECK(*l.degeneracy == l.sensitivity - *l.ei);
        CHECK(*l.phi == *l.ei - l.ei_parts);
        CHECK(l.samples_used == 2000);
      }
    }
    CHECK(epochs == std::vector<std::size_t>{0, 10, 20, 25});
    CHECK(r.network_at(0).widths() == spec.widths);
  }
  CHECK_FALSE(runs[0].checkpoints.back().weights == runs[1].checkpoints.back().weights);
  CHECK(train_run(runs[1].spec, data) == runs[1]);
}

TEST_CASE("zero learning rate freezes weights and measurements") {
  auto spec = quick_iris(6, 2);
  spec.train.learning_rate = 0.0;
  const auto data = load_task(spec, kData);
  const auto r = train_run(spec, data);
  REQUIRE(r.checkpoints.size() == 4);
  for (const auto& c : r.checkpoints) {
    CHECK(c.weights == r.checkpoints[0].weights);
    CHECK(c.layers == r.checkpoints[0].layers);
    CHECK(c.train_loss == r.checkpoints[0].train_loss);
  }
  const auto pts = causal_plane_series(r);
  for (std::size_t layer = 0; layer < 3; ++layer) {
    CHECK(path_length(pts, layer) == 0.0);
  }
}

TEST_CASE("mnist5 training lowers the loss for all three seeds") {
  auto spec = canonical_spec(Task::Mnist5);
  spec.measure_every = spec.train.epochs;
  spec.perturbation.samples = 1000;
  const auto data = load_task(spec, kData);
  for (const auto& r : train_runs(spec, data)) {
    CAPTURE(r.spec.train.seed);
    REQUIRE(r.checkpoints.size() == 2);
    CHECK(r.checkpoints.back().epoch == 500);
    CHECK(r.checkpoints.back().train_loss < r.checkpoints.front().train_loss);
  }
}

TEST_CASE("errors surface before training") {
  auto spec = quick_iris();
  const auto data = load_task(spec, kData);
  spec.widths = {4, 5, 3, 3};
  spec.train.learning_rate = -1.0;
  CHECK_THROWS_AS(train_run(spec, data), ConfigError);
}

TEST_CASE("edge sweeps") {
  CHECK(uniform_grid(0.0, 8.0, 161)[54] == doctest::Approx(2.7).epsilon(1e-15));
  CHECK(uniform_grid(0.0, 8.0, 161).back() == 8.0);
  CHECK_THROWS_AS(uniform_grid(0.0, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(uniform_grid(0.0, INFINITY, 5), ConfigError);

  const auto s = edge_slice(Activation::Tanh, 1.5);
  CHECK(s.in_ranges == std::vector<Interval>{Interval{-1.0, 1.0}});
  CHECK(s.weights(0, 0) == 1.5);
  const auto p = pair_slice(Activation::Relu, 1.0, 2.0);
  CHECK(p.n_in() == 2);
  CHECK(p.weights(0, 1) == 2.0);

  const auto curve = sweep_edge(Activation::Sigmoid, 0.0, 8.0, 33, config(30000, 64));
  REQUIRE(curve.size() == 33);
  CHECK(curve[0].w == 0.0);
  CHECK(curve[0].ei == 0.0);
  CHECK(sweep_edge(Activation::Sigmoid, 0.0, 8.0, 33, config(30000, 64))[20].ei == curve[20].ei);

  const std::size_t peak = argmax_ei(curve);
  CHECK(curve[peak].ei > curve.back().ei);
  CHECK(curve[peak].ei > curve[1].ei);
  const auto coarse = sweep_edge(Activation::Sigmoid, 0.0, 8.0, 33, config(30000, 8));
  CHECK(coarse[peak].ei <= curve[peak].ei);
  CHECK(coarse[argmax_ei(coarse)].ei <= curve[peak].ei);

  const std::vector<EdgePoint> tie{{0.0, 1.0}, {1.0, 2.0}, {2.0, 2.0}};
  CHECK(argmax_ei(tie) == 1);
  CHECK_THROWS_AS(argmax_ei({}), EmptyDataError);
}

TEST_CASE("two-input manifolds") {
  ManifoldGrid g;
  g.a_steps = 9;
  g.b_steps = 9;
  const auto m = sweep_manifold(Activation::Sigmoid, g, config(30000, 8), true);
  CHECK(m.a_values.size() == 9);
  CHECK(m.a_values[4] == 0.0);
  CHECK(m.ei.rows() == 9);
  CHECK(m.ei.cols() == 9);
  CHECK(m.ei(4, 4) == 0.0);
  double asym = 0.0;
  for (std::size_t i = 0; i < 9; ++i) {
    for (std::size_t j = 0; j < 9; ++j) {
      asym = std::max(asym, std::abs(m.ei(i, j) - m.ei(j, i)));
      CHECK(m.degeneracy(i, j) == m.sensitivity(i, j) - m.ei(i, j));
    }
  }
  CHECK(asym < 0.05);

  const auto plain = sweep_manifold(Activation::Sigmoid, g, config(30000, 8));
  CHECK(plain.ei == m.ei);
  CHECK(plain.sensitivity.empty());

  ManifoldGrid two;
  two.a_min = 0.0;
  two.a_max = 5.0;
  two.a_steps = 2;
  two.b_min = 0.0;
  two.b_max = 5.0;
  two.b_steps = 2;
  const auto d = sweep_manifold(Activation::Sigmoid, two, config(200000, 8), true);
  CHECK(d.degeneracy(1, 1) > d.degeneracy(1, 0));
}

TEST_CASE("causal plane series") {
  const auto spec = quick_iris(20, 10);
  const auto r = train_run(spec, load_task(spec, kData));
  std::vector<std::string> warnings;
  const auto pts = causal_plane_series(r, &warnings);
  CHECK(warnings.empty());
  REQUIRE(pts.size() == 9);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const auto& p = pts[k];
    CHECK(p.layer_index == k / 3);
    CHECK(p.epoch == r.checkpoints[k % 3].epoch);
    CHECK(std::abs((p.y - p.x) - *r.checkpoints[k % 3].layers[p.layer_index].ei) < 1e-12);
  }
  double expected = 0.0;
  for (std::size_t k = 1; k < 3; ++k) {
    expected += std::hypot(pts[k].x - pts[k - 1].x, pts[k].y - pts[k - 1].y);
  }
  CHECK(path_length(pts, 0) == doctest::Approx(expected).epsilon(1e-15));

  RunRecord single = r;
  single.checkpoints.resize(1);
  CHECK(causal_plane_series(single).size() == 3);

  RunRecord gap = r;
  gap.checkpoints[1].layers[2].ei.reset();
  gap.checkpoints[2].layers[2].ei.reset();
  warnings.clear();
  const auto some = causal_plane_series(gap, &warnings);
  CHECK(some.size() == 7);
  CHECK(warnings.size() == 1);
}

TEST_CASE("run records round-trip through JSONL") {
  auto spec = quick_iris(10, 5);
  const auto r = train_run(spec, load_task(spec, kData));
  std::stringstream io;
  write_run_jsonl(io, r);
  const RunRecord back = read_run_jsonl(io);
  CHECK(back == r);

  std::string text = io.str();
  const auto pos = text.find("\"version\":1");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 11, "\"version\":2");
  std::istringstream v2(text);
  CHECK_THROWS_AS(read_run_jsonl(v2), UnsupportedVersionError);

  std::istringstream empty("");
  CHECK_THROWS_AS(read_run_jsonl(empty), EmptyDataError);

  std::stringstream broken;
  write_run_jsonl(broken, r);
  broken << "{not json\n";
  try {
    read_run_jsonl(broken);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == r.checkpoints.size() + 2);
  }

  RunRecord absent = r;
  absent.checkpoints[0].layers[0].ei.reset();
  absent.checkpoints[0].layers[0].phi.reset();
  absent.checkpoints[0].layers[0].degeneracy.reset();
  std::stringstream io2;
  write_run_jsonl(io2, absent);
  CHECK(read_run_jsonl(io2) == absent);
}
