#include "eiprobe/network.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "eiprobe/random.hpp"

namespace eiprobe {

Network::Network(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& w = layers_[k].weights;
    if (w.rows() == 0 || w.cols() == 0) {
      throw DimensionError("layer " + std::to_string(k) + " has an empty weight matrix");
    }
    for (double v : w.values()) {
      if (!std::isfinite(v)) {
        throw DomainError("layer " + std::to_string(k) + " has a non-finite weight");
      }
    }
    if (k > 0 && layers_[k - 1].fan_out() != w.cols()) {
      throw DimensionError("layer " + std::to_string(k) + " fan_in " + std::to_string(w.cols()) +
                           " does not match previous fan_out " +
                           std::to_string(layers_[k - 1].fan_out()));
    }
  }
}

std::vector<std::size_t> Network::widths() const {
  std::vector<std::size_t> out;
  if (layers_.empty()) {
    return out;
  }
  out.push_back(layers_.front().fan_in());
  for (const auto& l : layers_) {
    out.push_back(l.fan_out());
  }
  return out;
}

std::size_t Network::input_width() const { return layers_.empty() ? 0 : layers_.front().fan_in(); }
std::size_t Network::output_width() const { return layers_.empty() ? 0 : layers_.back().fan_out(); }

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be finite and non-negative");
  }
  if (batch_size == 0) {
    throw ConfigError("batch size must be at least 1");
  }
}

namespace {

// z = W a
void affine(const Matrix& w, std::span<const double> a, std::span<double> z) {
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const auto row = w.row(r);
    double s = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      s += row[c] * a[c];
    }
    z[r] = s;
  }
}

void check_input(const Network& net, std::size_t width) {
  if (net.depth() == 0) {
    throw DimensionError("network has no layers");
  }
  if (width != net.input_width()) {
    throw DimensionError("input width " + std::to_string(width) +
                         " does not match network fan_in " + std::to_string(net.input_width()));
  }
}

void check_batch(const Network& net, const Matrix& inputs, const Matrix& targets) {
  check_input(net, inputs.cols());
  if (inputs.rows() != targets.rows()) {
    throw DimensionError("inputs and targets have different row counts");
  }
  if (targets.cols() != net.output_width()) {
    throw DimensionError("target width does not match network output width");
  }
  if (inputs.rows() == 0) {
    throw DimensionError("empty batch");
  }
}

} // namespace

std::vector<std::vector<double>> forward(const Network& net, std::span<const double> input) {
  check_input(net, input.size());
  std::vector<std::vector<double>> acts;
  acts.reserve(net.depth());
  std::span<const double> prev = input;
  for (const auto& layer : net.layers()) {
    std::vector<double> z(layer.fan_out());
    affine(layer.weights, prev, z);
    for (double& v : z) {
      v = activate(layer.activation, v);
    }
    acts.push_back(std::move(z));
    prev = acts.back();
  }
  return acts;
}

Matrix predict(const Network& net, const Matrix& inputs) {
  check_input(net, inputs.cols());
  Matrix out(inputs.rows(), net.output_width());
  for (std::size_t r = 0; r < inputs.rows(); ++r) {
    auto acts = forward(net, inputs.row(r));
    std::copy(acts.back().begin(), acts.back().end(), out.row(r).begin());
  }
  return out;
}

double mse_loss(const Network& net, const Matrix& inputs, const Matrix& targets) {
  check_batch(net, inputs, targets);
  const Matrix out = predict(net, inputs);
  double s = 0.0;
  for (std::size_t i = 0; i < out.values().size(); ++i) {
    const double d = out.values()[i] - targets.values()[i];
    s += d * d;
  }
  return s / static_cast<double>(out.values().size());
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) {
      best = i;
    }
  }
  return best;
}

double accuracy(const Network& net, const Matrix& inputs, const Matrix& targets) {
  check_batch(net, inputs, targets);
  const Matrix out = predict(net, inputs);
  std::size_t hits = 0;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    hits += argmax(out.row(r)) == argmax(targets.row(r)) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(out.rows());
}

std::vector<Matrix> backprop_mse(const Network& net, const Matrix& inputs, const Matrix& targets) {
  check_batch(net, inputs, targets);
  const std::size_t depth = net.depth();
  const double scale = 2.0 / static_cast<double>(inputs.rows() * net.output_width());

  std::vector<Matrix> grads;
  grads.reserve(depth);
  for (const auto& l : net.layers()) {
    grads.emplace_back(l.fan_out(), l.fan_in());
  }

  std::vector<std::vector<double>> z(depth), a(depth);
  std::vector<double> delta, prev_delta;
  for (std::size_t r = 0; r < inputs.rows(); ++r) {
    std::span<const double> prev = inputs.row(r);
    for (std::size_t k = 0; k < depth; ++k) {
      const auto& layer = net.layer(k);
      z[k].assign(layer.fan_out(), 0.0);
      affine(layer.weights, prev, z[k]);
      a[k].resize(layer.fan_out());
      for (std::size_t j = 0; j < z[k].size(); ++j) {
        a[k][j] = activate(layer.activation, z[k][j]);
      }
      prev = a[k];
    }

    const auto target = targets.row(r);
    delta.resize(net.output_width());
    for (std::size_t j = 0; j < delta.size(); ++j) {
      delta[j] = scale * (a[depth - 1][j] - target[j]) *
                 activate_derivative(net.layer(depth - 1).activation, z[depth - 1][j],
                                     a[depth - 1][j]);
    }

    for (std::size_t k = depth; k-- > 0;) {
      const auto& layer = net.layer(k);
      std::span<const double> below = k == 0 ? inputs.row(r) : std::span<const double>(a[k - 1]);
      for (std::size_t j = 0; j < layer.fan_out(); ++j) {
        auto g = grads[k].row(j);
        for (std::size_t i = 0; i < layer.fan_in(); ++i) {
          g[i] += delta[j] * below[i];
        }
      }
      if (k == 0) {
        break;
      }
      const Activation below_act = net.layer(k - 1).activation;
      prev_delta.assign(layer.fan_in(), 0.0);
      for (std::size_t j = 0; j < layer.fan_out(); ++j) {
        const auto w = layer.weights.row(j);
        for (std::size_t i = 0; i < layer.fan_in(); ++i) {
          prev_delta[i] += delta[j] * w[i];
        }
      }
      for (std::size_t i = 0; i < prev_delta.size(); ++i) {
        prev_delta[i] *= activate_derivative(below_act, z[k - 1][i], a[k - 1][i]);
      }
      std::swap(delta, prev_delta);
    }
  }
  return grads;
}

Network sgd_step(Network net, std::span<const Matrix> grads, double lr) {
  if (grads.size() != net.depth()) {
    throw DimensionError("gradient count does not match layer count");
  }
  for (std::size_t k = 0; k < net.depth(); ++k) {
    auto& w = net.layer(k).weights;
    if (grads[k].rows() != w.rows() || grads[k].cols() != w.cols()) {
      throw DimensionError("gradient shape mismatch at layer " + std::to_string(k));
    }
    auto wv = w.values();
    const auto gv = grads[k].values();
    for (std::size_t i = 0; i < wv.size(); ++i) {
      wv[i] -= lr * gv[i];
    }
  }
  return net;
}

Matrix init_uniform_fan_in(std::size_t fan_out, std::size_t fan_in, double scale,
                           std::uint64_t seed) {
  if (fan_out == 0 || fan_in == 0) {
    throw DimensionError("layer dimensions must be at least 1");
  }
  if (!(scale > 0.0)) {
    throw ConfigError("init scale must be positive");
  }
  const double bound = scale / std::sqrt(static_cast<double>(fan_in));
  const CounterStream stream(seed, streams::kInit);
  Matrix w(fan_out, fan_in);
  auto v = w.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = -bound + 2.0 * bound * stream.uniform(i);
  }
  return w;
}

Network make_network(std::span<const std::size_t> widths, Activation activation, double scale,
                     std::uint64_t seed) {
  if (widths.size() < 2) {
    throw ConfigError("a network needs at least two node layers");
  }
  std::vector<DenseLayer> layers;
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    const std::uint64_t layer_seed = mix64(seed + 0x51ed270b27a3ULL * (k + 1));
    layers.push_back({init_uniform_fan_in(widths[k + 1], widths[k], scale, layer_seed), activation});
  }
  return Network(std::move(layers));
}

void train_epoch(Network& net, const Matrix& inputs, const Matrix& targets,
                 const TrainConfig& cfg, std::uint64_t epoch) {
  cfg.validate();
  check_batch(net, inputs, targets);
  std::vector<std::size_t> order(inputs.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  StreamEngine rng(cfg.seed, streams::kShuffle + epoch);
  shuffle_in_place(std::span<std::size_t>(order), rng);

  for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
    const std::size_t n = std::min(cfg.batch_size, order.size() - start);
    Matrix bx(n, inputs.cols()), by(n, targets.cols());
    for (std::size_t i = 0; i < n; ++i) {
      const auto src = order[start + i];
      std::copy(inputs.row(src).begin(), inputs.row(src).end(), bx.row(i).begin());
      std::copy(targets.row(src).begin(), targets.row(src).end(), by.row(i).begin());
    }
    const auto grads = backprop_mse(net, bx, by);
    net = sgd_step(std::move(net), grads, cfg.learning_rate);
  }
}

} // namespace eiprobe
