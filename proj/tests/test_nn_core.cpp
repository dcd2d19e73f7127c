#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "eiprobe/activation.hpp"
#include "eiprobe/errors.hpp"
#include "eiprobe/network.hpp"
#include "eiprobe/weights_io.hpp"
#include "gradcheck.hpp"

using namespace eiprobe;

namespace {

Network single(double w, Activation a) { return Network({DenseLayer{Matrix(1, 1, w), a}}); }

Matrix row(std::initializer_list<double> v) { return Matrix(1, v.size(), std::vector<double>(v)); }

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("eiprobe_nn_" + name);
}

} // namespace

TEST_CASE("activation ranges") {
  CHECK(output_range(Activation::Sigmoid) == Interval{0.0, 1.0});
  CHECK(output_range(Activation::Tanh) == Interval{-1.0, 1.0});
  CHECK(output_range(Activation::Relu) == Interval{0.0, 1.0});
  for (auto a : {Activation::Sigmoid, Activation::Tanh, Activation::Relu}) {
    CHECK(perturbation_range(a) == output_range(a));
  }
}

TEST_CASE("activation_apply values and domain") {
  CHECK(activation_apply(Activation::Sigmoid, 0.0) == 0.5);
  CHECK(activation_apply(Activation::Tanh, 0.0) == 0.0);
  CHECK(activation_apply(Activation::Relu, -3.2) == 0.0);
  CHECK(activation_apply(Activation::Relu, 2.5) == 2.5);
  CHECK_THROWS_AS(activation_apply(Activation::Sigmoid, NAN), DomainError);
  CHECK_THROWS_AS(activation_apply(Activation::Tanh, INFINITY), DomainError);
}

TEST_CASE("activation names") {
  for (auto a : {Activation::Sigmoid, Activation::Tanh, Activation::Relu}) {
    CHECK(parse_activation(to_string(a)) == a);
  }
  CHECK_THROWS_AS(parse_activation("softplus"), ConfigError);
}

TEST_CASE("network construction is validated") {
  CHECK_THROWS_AS(Network({DenseLayer{Matrix(0, 2), Activation::Sigmoid}}), DimensionError);
  CHECK_THROWS_AS(Network({DenseLayer{Matrix(3, 2), Activation::Sigmoid},
                           DenseLayer{Matrix(1, 2), Activation::Sigmoid}}),
                  DimensionError);
  CHECK_THROWS_AS(single(NAN, Activation::Sigmoid), DomainError);
  const Network net({DenseLayer{Matrix(5, 4), Activation::Sigmoid},
                     DenseLayer{Matrix(3, 5), Activation::Sigmoid}});
  CHECK(net.widths() == std::vector<std::size_t>{4, 5, 3});
  CHECK(net.input_width() == 4);
  CHECK(net.output_width() == 3);
  CHECK(net.depth() == 2);
}

TEST_CASE("forward pass") {
  SUBCASE("zero weights give the activation at 0 for any input") {
    const Network net({DenseLayer{Matrix(3, 2, 0.0), Activation::Sigmoid}});
    for (double a : {0.0, 0.3, 1.0}) {
      const std::vector<double> in{a, 1.0 - a};
      const auto acts = forward(net, in);
      for (double v : acts.back()) {
        CHECK(v == 0.5);
      }
    }
  }
  SUBCASE("relu with w=0") {
    const std::vector<double> in{0.7};
    CHECK(forward(single(0.0, Activation::Relu), in).back()[0] == 0.0);
  }
  SUBCASE("1x1 sigmoid with w=1 at input 1") {
    const std::vector<double> in{1.0};
    CHECK(forward(single(1.0, Activation::Sigmoid), in).back()[0] ==
          doctest::Approx(0.7310585786300049).epsilon(1e-15));
  }
  SUBCASE("shape mismatch") {
    const std::vector<double> in{1.0, 2.0};
    CHECK_THROWS_AS(forward(single(1.0, Activation::Sigmoid), in), DimensionError);
  }
}

TEST_CASE("loss and accuracy") {
  const Network net({DenseLayer{Matrix(2, 1, 0.0), Activation::Sigmoid}});
  const Matrix x(2, 1, 1.0);
  const Matrix y(2, 2, std::vector<double>{1, 0, 0, 1});
  // Every output is 0.5, so each squared error is 0.25.
  CHECK(mse_loss(net, x, y) == 0.25);
  // Tied outputs resolve to index 0: right for row 0 only.
  CHECK(accuracy(net, x, y) == 0.5);
  const std::vector<double> tie{0.2, 0.7, 0.7};
  CHECK(argmax(tie) == 1);
  CHECK_THROWS_AS(mse_loss(net, x, Matrix(2, 3)), DimensionError);
}

TEST_CASE("backprop at the minimum is zero") {
  const Network net({DenseLayer{Matrix(2, 3, 0.0), Activation::Sigmoid}});
  const Matrix x(4, 3, 0.25);
  const Matrix y(4, 2, 0.5);
  for (const auto& g : backprop_mse(net, x, y)) {
    for (double v : g.values()) {
      CHECK(v == 0.0);
    }
  }
  CHECK_THROWS_AS(backprop_mse(net, x, Matrix(3, 2)), DimensionError);
}

TEST_CASE("backprop of a single sigmoid edge matches a closed form") {
  // L = (s(w x) - t)^2, dL/dw = 2 (s - t) s (1 - s) x.
  const double w = 0.8, x = 0.6, t = 0.1;
  const double s = oracle::sigmoid(w * x);
  const auto g = backprop_mse(single(w, Activation::Sigmoid), row({x}), row({t}));
  CHECK(g[0](0, 0) == doctest::Approx(2 * (s - t) * s * (1 - s) * x).epsilon(1e-12));
  const auto c = gradcheck::max_relative_error(single(w, Activation::Sigmoid), row({x}), row({t}),
                                               1e-6);
  CHECK(c < 1e-6);
}

TEST_CASE("backprop matches finite differences on random networks") {
  for (auto a : {Activation::Sigmoid, Activation::Tanh, Activation::Relu}) {
    CAPTURE(to_string(a));
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      CAPTURE(seed);
      const auto c = gradcheck::random_case(a, seed);
      CHECK(gradcheck::max_relative_error(c.net, c.x, c.y) < 1e-5);
    }
  }
}

TEST_CASE("sgd_step arithmetic") {
  const Network net = single(1.0, Activation::Sigmoid);
  const std::vector<Matrix> g{Matrix(1, 1, 0.5)};
  CHECK(sgd_step(net, g, 0.01).layer(0).weights(0, 0) == 0.995);
  CHECK(sgd_step(net, g, 0.0) == net);

  const Network big = make_network(std::vector<std::size_t>{3, 4, 2}, Activation::Tanh, 1.0, 9);
  const auto grads = backprop_mse(big, Matrix(2, 3, 0.4), Matrix(2, 2, 0.9));
  const Network stepped = sgd_step(big, grads, 0.05);
  for (std::size_t k = 0; k < big.depth(); ++k) {
    for (std::size_t e = 0; e < grads[k].values().size(); ++e) {
      CHECK(stepped.layer(k).weights.values()[e] ==
            big.layer(k).weights.values()[e] - 0.05 * grads[k].values()[e]);
    }
  }
  CHECK_THROWS_AS(sgd_step(big, std::vector<Matrix>{Matrix(1, 1)}, 0.1), DimensionError);
}

TEST_CASE("a small step reduces the loss of the example it was computed on") {
  for (auto a : {Activation::Sigmoid, Activation::Tanh, Activation::Relu}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      auto c = gradcheck::random_case(a, seed + 100);
      const Matrix x(1, c.x.cols(), std::vector<double>(c.x.row(0).begin(), c.x.row(0).end()));
      const Matrix y(1, c.y.cols(), std::vector<double>(c.y.row(0).begin(), c.y.row(0).end()));
      const double before = mse_loss(c.net, x, y);
      const auto g = backprop_mse(c.net, x, y);
      bool any = false;
      for (const auto& m : g) {
        for (double v : m.values()) {
          any |= v != 0.0;
        }
      }
      if (!any) {
        continue; // dead ReLU path
      }
      CHECK(mse_loss(sgd_step(c.net, g, 1e-4), x, y) < before);
    }
  }
}

TEST_CASE("fan-in uniform initialisation") {
  const Matrix a = init_uniform_fan_in(6, 25, 1.0, 42);
  CHECK(a.rows() == 6);
  CHECK(a.cols() == 25);
  for (double v : a.values()) {
    CHECK(std::abs(v) <= 1.0 / 5.0);
  }
  CHECK(init_uniform_fan_in(6, 25, 1.0, 42) == a);
  CHECK_FALSE(init_uniform_fan_in(6, 25, 1.0, 43) == a);
  const Matrix wide = init_uniform_fan_in(3, 4, 5.0, 1);
  for (double v : wide.values()) {
    CHECK(std::abs(v) <= 2.5);
  }

  // Mean of U[-b, b] is 0 with standard error b / sqrt(3 n).
  const Matrix big = init_uniform_fan_in(100, 1000, 1.0, 7);
  double sum = 0.0;
  for (double v : big.values()) {
    sum += v;
  }
  const double n = static_cast<double>(big.values().size());
  const double b = 1.0 / std::sqrt(1000.0);
  CHECK(std::abs(sum / n) < 3.0 * b / std::sqrt(3.0 * n));
}

TEST_CASE("training is deterministic and lr=0 leaves weights unchanged") {
  const std::vector<std::size_t> widths{4, 5, 3};
  StreamEngine rng(5, 1);
  Matrix x(30, 4), y(30, 3, 0.0);
  for (double& v : x.values()) {
    v = rng.uniform();
  }
  for (std::size_t r = 0; r < 30; ++r) {
    y(r, r % 3) = 1.0;
  }
  TrainConfig cfg{0.5, 7, 3, 11};
  Network a = make_network(widths, Activation::Sigmoid, 1.0, 3);
  Network b = a;
  const Network start = a;
  for (std::uint64_t e = 0; e < 3; ++e) {
    train_epoch(a, x, y, cfg, e);
    train_epoch(b, x, y, cfg, e);
  }
  CHECK(a == b);
  CHECK_FALSE(a == start);

  cfg.learning_rate = 0.0;
  Network c = start;
  train_epoch(c, x, y, cfg, 0);
  CHECK(c == start);

  cfg.batch_size = 0;
  CHECK_THROWS_AS(train_epoch(c, x, y, cfg, 0), ConfigError);
}

TEST_CASE("weight file round trip is bit exact") {
  Network net = make_network(std::vector<std::size_t>{3, 2, 2}, Activation::Tanh, 1.0, 5);
  net.layer(0).weights(0, 0) = -0.0;
  net.layer(0).weights(0, 1) = 4.9406564584124654e-324;
  net.layer(1).activation = Activation::Relu;
  const auto path = temp_file("roundtrip.bin");
  save_weights(net, path);
  const Network back = load_weights(path);
  REQUIRE(back.depth() == net.depth());
  for (std::size_t k = 0; k < net.depth(); ++k) {
    CHECK(back.layer(k).activation == net.layer(k).activation);
    const auto a = net.layer(k).weights.values();
    const auto b = back.layer(k).weights.values();
    REQUIRE(a.size() == b.size());
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
  }
  CHECK(encode_weights(back) == encode_weights(net));
  std::filesystem::remove(path);
}

TEST_CASE("malformed weight files") {
  const Network net = make_network(std::vector<std::size_t>{2, 2}, Activation::Sigmoid, 1.0, 1);
  const auto bytes = encode_weights(net);

  SUBCASE("bad magic") {
    auto b = bytes;
    b[0] = 'X';
    try {
      decode_weights(b);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.offset() == 0);
    }
  }
  SUBCASE("truncated") {
    for (std::size_t cut : {std::size_t{4}, std::size_t{13}, bytes.size() - 1}) {
      const std::vector<std::uint8_t> b(bytes.begin(), bytes.begin() + cut);
      CHECK_THROWS_AS(decode_weights(b), ParseError);
    }
  }
  SUBCASE("trailing bytes") {
    auto b = bytes;
    b.push_back(0);
    try {
      decode_weights(b);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.offset() == bytes.size());
    }
  }
  SUBCASE("unsupported version") {
    auto b = bytes;
    b[8] = 2;
    CHECK_THROWS_AS(decode_weights(b), UnsupportedVersionError);
  }
  SUBCASE("unknown activation tag") {
    auto b = bytes;
    b[24] = 9;
    CHECK_THROWS_AS(decode_weights(b), ParseError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_weights(temp_file("does_not_exist.bin")), IoError);
  }
}
