#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "eiprobe/errors.hpp"

namespace eiprobe {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double width() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

enum class Activation : std::uint8_t {
  Sigmoid = 0,
  Tanh = 1,
  Relu = 2,
};

// Range the activation's output is binned over. ReLU is unbounded above; its
// outputs are clipped into [0,1] when binned.
constexpr Interval output_range(Activation a) {
  switch (a) {
  case Activation::Tanh:
    return {-1.0, 1.0};
  case Activation::Sigmoid:
  case Activation::Relu:
  default:
    return {0.0, 1.0};
  }
}

// Maximum-entropy perturbations of a node are drawn uniformly over the same
// interval its activation is binned over.
constexpr Interval perturbation_range(Activation a) { return output_range(a); }

// Unchecked evaluation for hot loops.
inline double activate(Activation a, double x) {
  switch (a) {
  case Activation::Sigmoid:
    return 1.0 / (1.0 + std::exp(-x));
  case Activation::Tanh:
    return std::tanh(x);
  case Activation::Relu:
  default:
    return x > 0.0 ? x : 0.0;
  }
}

// Derivative expressed through the activation output `y` and pre-activation `z`.
inline double activate_derivative(Activation a, double z, double y) {
  switch (a) {
  case Activation::Sigmoid:
    return y * (1.0 - y);
  case Activation::Tanh:
    return 1.0 - y * y;
  case Activation::Relu:
  default:
    return z > 0.0 ? 1.0 : 0.0;
  }
}

/// Checked activation: throws DomainError for non-finite input.
double activation_apply(Activation a, double x);

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

} // namespace eiprobe
