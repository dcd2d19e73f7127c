#include "eiprobe/ei.hpp"

#include <cmath>
#include <string>

#include "eiprobe/parallel.hpp"

namespace eiprobe {

void LayerSlice::validate() const {
  if (weights.rows() == 0 || weights.cols() == 0) {
    throw DimensionError("layer slice needs at least one input and one output node");
  }
  if (in_ranges.size() != n_in()) {
    throw DimensionError("layer slice has " + std::to_string(in_ranges.size()) +
                         " input ranges for " + std::to_string(n_in()) + " input nodes");
  }
  for (const auto& r : in_ranges) {
    if (!(r.hi > r.lo) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
      throw ConfigError("input perturbation ranges must be finite with hi > lo");
    }
  }
  for (double v : weights.values()) {
    if (!std::isfinite(v)) {
      throw DomainError("layer slice has a non-finite weight");
    }
  }
}

LayerSlice make_slice(Matrix weights, Activation out_activation, Interval in_range) {
  LayerSlice s{std::move(weights), out_activation, {}};
  s.in_ranges.assign(s.n_in(), in_range);
  return s;
}

LayerSlice slice_of(const Network& net, std::size_t k) {
  if (k >= net.depth()) {
    throw DimensionError("slice index " + std::to_string(k) + " out of range");
  }
  const Interval in = k == 0 ? Interval{0.0, 1.0} : perturbation_range(net.layer(k - 1).activation);
  return make_slice(net.layer(k).weights, net.layer(k).activation, in);
}

void PerturbationConfig::validate() const {
  if (samples < 1) {
    throw ConfigError("perturbation needs at least one sample");
  }
  if (bins < 2) {
    throw ConfigError("perturbation needs at least two bins");
  }
}

PerturbationStream::PerturbationStream(const LayerSlice& slice, std::uint64_t seed)
    : slice_(&slice), stream_(seed, 0) {}

void PerturbationStream::sample(std::uint64_t k, std::span<double> inputs,
                                std::span<double> outputs) const {
  const auto& s = *slice_;
  const std::size_t n = s.n_in();
  for (std::size_t i = 0; i < n; ++i) {
    inputs[i] = perturbed_value(s.in_ranges[i], stream_.uniform(k * n + i));
  }
  for (std::size_t j = 0; j < s.n_out(); ++j) {
    const auto row = s.weights.row(j);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      z += row[i] * inputs[i];
    }
    outputs[j] = activate(s.out_activation, z);
  }
}

namespace {

std::vector<BinningScheme> input_schemes(const LayerSlice& s, std::size_t bins) {
  std::vector<BinningScheme> out;
  out.reserve(s.n_in());
  for (const auto& r : s.in_ranges) {
    out.emplace_back(bins, r);
  }
  return out;
}

std::vector<StateKey> place_values(std::size_t width, std::size_t bins) {
  std::vector<StateKey> out(width);
  StateKey p = 1;
  for (std::size_t k = 0; k < width; ++k) {
    out[k] = p;
    if (k + 1 < width) {
      p *= bins;
    }
  }
  return out;
}

void require_joint_capacity(const LayerSlice& s, std::size_t bins) {
  if (!joint_key_fits(bins, s.n_in()) || !joint_key_fits(bins, s.n_out())) {
    throw CapacityError("joint EI of a " + std::to_string(s.n_in()) + "->" +
                        std::to_string(s.n_out()) + " slice at " + std::to_string(bins) +
                        " bins exceeds the 128-bit joint key capacity");
  }
}

bool joint_feasible(const LayerSlice& s, std::size_t bins) {
  return joint_key_fits(bins, s.n_in()) && joint_key_fits(bins, s.n_out());
}

struct JointShard {
  JointHistogram joint;
  std::vector<PairHistogram> pairs;
};

} // namespace

StreamingProbe::StreamingProbe(LayerSlice slice, const PerturbationConfig& cfg, Options options)
    : slice_(std::move(slice)), cfg_(cfg), options_(options) {
  slice_.validate();
  cfg_.validate();
  if (options_.joint) {
    require_joint_capacity(slice_, cfg_.bins);
  }
  if (options_.parts) {
    pairs_.assign(slice_.n_in() * slice_.n_out(), PairHistogram(cfg_.bins, cfg_.bins));
  }
}

void StreamingProbe::extend_to(std::uint64_t samples) {
  if (samples <= done_) {
    return;
  }
  const std::size_t n = slice_.n_in();
  const std::size_t m = slice_.n_out();
  const std::size_t bins = cfg_.bins;
  const auto in_schemes = input_schemes(slice_, bins);
  const BinningScheme out_scheme(bins, output_range(slice_.out_activation));
  const auto in_place = place_values(n, bins);
  const auto out_place = place_values(m, bins);
  const PerturbationStream stream(slice_, cfg_.seed);
  const Options opts = options_;

  auto make = [&] {
    JointShard s;
    if (opts.parts) {
      s.pairs.assign(n * m, PairHistogram(bins, bins));
    }
    return s;
  };
  auto work = [&](JointShard& shard, std::uint64_t begin, std::uint64_t end) {
    std::vector<double> x(n), y(m);
    std::vector<std::size_t> xb(n), yb(m);
    for (std::uint64_t k = begin; k < end; ++k) {
      stream.sample(k, x, y);
      for (std::size_t i = 0; i < n; ++i) {
        xb[i] = in_schemes[i].index(x[i]);
      }
      for (std::size_t j = 0; j < m; ++j) {
        yb[j] = out_scheme.index(y[j]);
      }
      if (opts.joint) {
        StateKey xk = 0, yk = 0;
        for (std::size_t i = 0; i < n; ++i) {
          xk += in_place[i] * xb[i];
        }
        for (std::size_t j = 0; j < m; ++j) {
          yk += out_place[j] * yb[j];
        }
        shard.joint.add(xk, yk);
      }
      if (opts.parts) {
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < m; ++j) {
            shard.pairs[i * m + j].add(xb[i], yb[j]);
          }
        }
      }
    }
  };

  auto shards = run_sharded(done_, samples, resolve_workers(cfg_.workers), make, work);
  for (auto& s : shards) {
    if (opts.joint) {
      joint_.merge(s.joint);
    }
    if (opts.parts) {
      for (std::size_t p = 0; p < pairs_.size(); ++p) {
        pairs_[p].merge(s.pairs[p]);
      }
    }
  }
  done_ = samples;
}

double StreamingProbe::ei() const {
  if (!options_.joint) {
    throw ConfigError("probe was built without the joint histogram");
  }
  return mutual_information(joint_);
}

double StreamingProbe::ei_parts() const {
  if (!options_.parts) {
    throw ConfigError("probe was built without pair histograms");
  }
  double sum = 0.0;
  for (const auto& h : pairs_) {
    sum += mutual_information(h);
  }
  return sum;
}

double ei_joint(const LayerSlice& slice, const PerturbationConfig& cfg) {
  StreamingProbe probe(slice, cfg, {.joint = true, .parts = false});
  probe.extend_to(cfg.samples);
  return probe.ei();
}

double ei_parts(const LayerSlice& slice, const PerturbationConfig& cfg) {
  StreamingProbe probe(slice, cfg, {.joint = false, .parts = true});
  probe.extend_to(cfg.samples);
  return probe.ei_parts();
}

std::vector<double> sensitivity_pairs(const LayerSlice& slice, const PerturbationConfig& cfg) {
  slice.validate();
  cfg.validate();
  const std::size_t n = slice.n_in();
  const std::size_t m = slice.n_out();
  const std::size_t bins = cfg.bins;
  const auto in_schemes = input_schemes(slice, bins);
  const BinningScheme out_scheme(bins, output_range(slice.out_activation));

  std::vector<CounterStream> streams;
  streams.reserve(n * m);
  for (std::size_t p = 0; p < n * m; ++p) {
    streams.emplace_back(cfg.seed, p);
  }

  auto make = [&] { return std::vector<PairHistogram>(n * m, PairHistogram(bins, bins)); };
  auto work = [&](std::vector<PairHistogram>& hs, std::uint64_t begin, std::uint64_t end) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t p = i * m + j;
        const double w = slice.weights(j, i);
        const auto& stream = streams[p];
        auto& h = hs[p];
        for (std::uint64_t k = begin; k < end; ++k) {
          const double x = perturbed_value(slice.in_ranges[i], stream.uniform(k));
          // Other inputs are clamped to 0 and contribute nothing.
          const double y = activate(slice.out_activation, w * x);
          h.add(in_schemes[i].index(x), out_scheme.index(y));
        }
      }
    }
  };

  auto shards = run_sharded(0, cfg.samples, resolve_workers(cfg.workers), make, work);
  auto& total = shards.front();
  for (std::size_t s = 1; s < shards.size(); ++s) {
    for (std::size_t p = 0; p < total.size(); ++p) {
      total[p].merge(shards[s][p]);
    }
  }
  std::vector<double> out;
  out.reserve(total.size());
  for (const auto& h : total) {
    out.push_back(mutual_information(h));
  }
  return out;
}

double sensitivity(const LayerSlice& slice, const PerturbationConfig& cfg) {
  double sum = 0.0;
  for (double v : sensitivity_pairs(slice, cfg)) {
    sum += v;
  }
  return sum;
}

EIResult measure_all(const LayerSlice& slice, const PerturbationConfig& cfg) {
  slice.validate();
  cfg.validate();
  EIResult r;
  r.samples_used = cfg.samples;
  r.bins = cfg.bins;
  r.seed = cfg.seed;

  const bool joint = joint_feasible(slice, cfg.bins);
  StreamingProbe probe(slice, cfg, {.joint = joint, .parts = true});
  probe.extend_to(cfg.samples);
  r.ei_parts = probe.ei_parts();
  r.sensitivity = sensitivity(slice, cfg);
  if (joint) {
    const double ei = probe.ei();
    r.ei = ei;
    r.degeneracy = degeneracy(r.sensitivity, ei);
    r.phi = phi_feedforward(ei, r.ei_parts);
  }
  return r;
}

} // namespace eiprobe
