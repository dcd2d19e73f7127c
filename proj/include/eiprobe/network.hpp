#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "eiprobe/activation.hpp"
#include "eiprobe/matrix.hpp"

namespace eiprobe {

// Bias-free dense layer; weights are (fan_out x fan_in), row-major.
struct DenseLayer {
  Matrix weights;
  Activation activation = Activation::Sigmoid;

  std::size_t fan_in() const { return weights.cols(); }
  std::size_t fan_out() const { return weights.rows(); }
  bool operator==(const DenseLayer&) const = default;
};

class Network {
public:
  Network() = default;
  explicit Network(std::vector<DenseLayer> layers);

  // Widths of every node layer, input first: {fan_in(0), fan_out(0), ...}.
  std::vector<std::size_t> widths() const;
  std::size_t input_width() const;
  std::size_t output_width() const;
  std::size_t depth() const { return layers_.size(); }

  const std::vector<DenseLayer>& layers() const { return layers_; }
  const DenseLayer& layer(std::size_t k) const { return layers_.at(k); }
  DenseLayer& layer(std::size_t k) { return layers_.at(k); }

  bool operator==(const Network&) const = default;

private:
  std::vector<DenseLayer> layers_;
};

struct TrainConfig {
  double learning_rate = 0.01;
  std::size_t batch_size = 10;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

// Activations of every layer (excluding the input), outermost last.
std::vector<std::vector<double>> forward(const Network& net, std::span<const double> input);

// Output-layer activations for every row of `inputs`.
Matrix predict(const Network& net, const Matrix& inputs);

// Mean over rows and output dimensions of (output - target)^2.
double mse_loss(const Network& net, const Matrix& inputs, const Matrix& targets);

// Fraction of rows whose output argmax matches the target argmax (ties go to
// the lowest index).
double accuracy(const Network& net, const Matrix& inputs, const Matrix& targets);

// Gradient of mse_loss with respect to every weight matrix.
std::vector<Matrix> backprop_mse(const Network& net, const Matrix& inputs, const Matrix& targets);

// W <- W - lr * grad for every layer.
Network sgd_step(Network net, std::span<const Matrix> grads, double lr);

// Entries i.i.d. uniform on [-scale/sqrt(fan_in), scale/sqrt(fan_in)].
Matrix init_uniform_fan_in(std::size_t fan_out, std::size_t fan_in, double scale,
                           std::uint64_t seed);

// Network of the given node widths; layer k is seeded from (seed, k).
Network make_network(std::span<const std::size_t> widths, Activation activation, double scale,
                     std::uint64_t seed);

// One pass of mini-batch SGD over a freshly shuffled ordering of the rows.
// The ordering is a pure function of (cfg.seed, epoch).
void train_epoch(Network& net, const Matrix& inputs, const Matrix& targets,
                 const TrainConfig& cfg, std::uint64_t epoch);

std::size_t argmax(std::span<const double> values);

} // namespace eiprobe
