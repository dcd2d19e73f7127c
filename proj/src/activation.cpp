#include "eiprobe/activation.hpp"

#include <string>

namespace eiprobe {

double activation_apply(Activation a, double x) {
  if (!std::isfinite(x)) {
    throw DomainError("activation input is not finite");
  }
  return activate(a, x);
}

std::string_view to_string(Activation a) {
  switch (a) {
  case Activation::Sigmoid:
    return "sigmoid";
  case Activation::Tanh:
    return "tanh";
  case Activation::Relu:
    return "relu";
  }
  return "unknown";
}

Activation parse_activation(std::string_view name) {
  if (name == "sigmoid") {
    return Activation::Sigmoid;
  }
  if (name == "tanh") {
    return Activation::Tanh;
  }
  if (name == "relu") {
    return Activation::Relu;
  }
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

} // namespace eiprobe
