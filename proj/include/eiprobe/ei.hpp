#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "eiprobe/activation.hpp"
#include "eiprobe/binning.hpp"
#include "eiprobe/histogram.hpp"
#include "eiprobe/matrix.hpp"
#include "eiprobe/network.hpp"
#include "eiprobe/random.hpp"

namespace eiprobe {

// One measurement target: weights feeding n_out nodes from n_in nodes.
// Input node i is perturbed uniformly over in_ranges[i] and binned over the
// same interval; outputs are binned over output_range(out_activation).
struct LayerSlice {
  Matrix weights; // n_out x n_in
  Activation out_activation = Activation::Sigmoid;
  std::vector<Interval> in_ranges;

  std::size_t n_in() const { return weights.cols(); }
  std::size_t n_out() const { return weights.rows(); }

  void validate() const;
};

// Slice with every input node perturbed over `in_range` (defaults to the
// data domain [0,1]).
LayerSlice make_slice(Matrix weights, Activation out_activation, Interval in_range = {0.0, 1.0});

// Slice k of a network: input layer perturbed over [0,1], deeper layers over
// the perturbation range of the upstream activation.
LayerSlice slice_of(const Network& net, std::size_t k);

struct PerturbationConfig {
  std::uint64_t samples = 10'000'000;
  std::size_t bins = 8;
  std::uint64_t seed = 0;
  // Thread count for sharded sampling; 0 defers to resolve_workers. Results
  // do not depend on it.
  std::size_t workers = 0;

  void validate() const;
  bool operator==(const PerturbationConfig&) const = default;
};

struct EIResult {
  std::optional<double> ei; // absent when the joint key space is too large
  double ei_parts = 0.0;
  double sensitivity = 0.0;
  std::optional<double> degeneracy;
  std::optional<double> phi;
  std::uint64_t samples_used = 0;
  std::size_t bins = 0;
  std::uint64_t seed = 0;

  bool operator==(const EIResult&) const = default;
};

inline double perturbed_value(const Interval& range, double unit) {
  return range.lo + unit * range.width();
}

// Maximum-entropy perturbation of a slice as a random-access sample stream.
// Sample k draws input node i from position k*n_in + i of perturbation
// stream 0, so any shard of indices reproduces the same samples.
class PerturbationStream {
public:
  PerturbationStream(const LayerSlice& slice, std::uint64_t seed);

  void sample(std::uint64_t k, std::span<double> inputs, std::span<double> outputs) const;

  const LayerSlice& slice() const { return *slice_; }

private:
  const LayerSlice* slice_;
  CounterStream stream_;
};

// Incremental joint-perturbation measurement: keeps the joint histogram and
// the per-pair histograms of one stream and extends them to longer prefixes
// of it. Extending to s then 2s equals a single pass over 2s samples.
class StreamingProbe {
public:
  struct Options {
    bool joint = true; // accumulate the joint-state histogram (needs key capacity)
    bool parts = true; // accumulate per-pair histograms
  };

  StreamingProbe(LayerSlice slice, const PerturbationConfig& cfg, Options options);
  StreamingProbe(LayerSlice slice, const PerturbationConfig& cfg)
      : StreamingProbe(std::move(slice), cfg, Options{}) {}

  void extend_to(std::uint64_t samples);
  std::uint64_t samples() const { return done_; }

  double ei() const;
  double ei_parts() const;

  const JointHistogram& joint() const { return joint_; }
  const std::vector<PairHistogram>& pairs() const { return pairs_; }

private:
  LayerSlice slice_;
  PerturbationConfig cfg_;
  Options options_;
  std::uint64_t done_ = 0;
  JointHistogram joint_;
  std::vector<PairHistogram> pairs_; // index i * n_out + j
};

// Plug-in MI between the joint input state and joint output state under the
// full-layer perturbation. Throws CapacityError if keys do not fit.
double ei_joint(const LayerSlice& slice, const PerturbationConfig& cfg);

// Sum over all (i, j) of pairwise MI under the same joint perturbation stream.
double ei_parts(const LayerSlice& slice, const PerturbationConfig& cfg);

// Sum over all (i, j) of pairwise MI when only input i is perturbed and the
// other inputs are clamped to 0. Pair (i, j) uses perturbation stream
// i * n_out + j.
double sensitivity(const LayerSlice& slice, const PerturbationConfig& cfg);

// Per-pair sensitivity contributions, index i * n_out + j.
std::vector<double> sensitivity_pairs(const LayerSlice& slice, const PerturbationConfig& cfg);

inline double degeneracy(double sens, double ei) { return sens - ei; }
inline double phi_feedforward(double ei, double ei_parts) { return ei - ei_parts; }

// ei, ei_parts (shared stream), sensitivity, and the two derived fields.
EIResult measure_all(const LayerSlice& slice, const PerturbationConfig& cfg);

} // namespace eiprobe
