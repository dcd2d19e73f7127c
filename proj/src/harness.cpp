#include "eiprobe/harness.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "eiprobe/errors.hpp"
#include "eiprobe/parallel.hpp"

namespace eiprobe {

std::string_view to_string(Task t) { return t == Task::Iris ? "iris" : "mnist5"; }

Task parse_task(std::string_view name) {
  if (name == "iris") {
    return Task::Iris;
  }
  if (name == "mnist5") {
    return Task::Mnist5;
  }
  throw ConfigError("unknown task '" + std::string(name) + "' (expected iris or mnist5)");
}

void ExperimentSpec::validate() const {
  if (widths.size() < 2) {
    throw ConfigError("architecture needs at least an input and an output width");
  }
  for (auto w : widths) {
    if (w == 0) {
      throw ConfigError("layer widths must be positive");
    }
  }
  const std::size_t in = task == Task::Iris ? 4 : kMnist5Side * kMnist5Side;
  const std::size_t out = task == Task::Iris ? 3 : kMnist5Classes;
  if (widths.front() != in || widths.back() != out) {
    throw ConfigError("architecture for " + std::string(to_string(task)) + " must map " +
                      std::to_string(in) + " inputs to " + std::to_string(out) + " outputs");
  }
  if (!(init_scale > 0.0) || !std::isfinite(init_scale)) {
    throw ConfigError("init scale must be positive");
  }
  if (measure_every == 0) {
    throw ConfigError("measure_every must be at least 1");
  }
  if (runs == 0) {
    throw ConfigError("runs must be at least 1");
  }
  train.validate();
  perturbation.validate();
  if (task == Task::Iris) {
    split.validate();
  }
}

ExperimentSpec canonical_spec(Task task, std::uint64_t seed) {
  ExperimentSpec s;
  s.task = task;
  s.activation = Activation::Sigmoid;
  s.init_scale = 1.0;
  s.train.learning_rate = 0.01;
  s.train.seed = seed;
  s.perturbation.samples = 1'000'000;
  s.perturbation.bins = 8;
  s.perturbation.seed = seed;
  s.runs = 3;
  s.split = SplitSpec{1.0 / 3.0, seed};
  if (task == Task::Iris) {
    s.widths = {4, 5, 5, 3};
    s.train.batch_size = 10;
    s.train.epochs = 4000;
    s.measure_every = 40;
  } else {
    s.widths = {25, 6, 6, 5};
    s.train.batch_size = 50;
    s.train.epochs = 500;
    s.measure_every = 5;
  }
  return s;
}

ExperimentSpec redundant_layer_variant(ExperimentSpec spec, int extra_hidden) {
  if (extra_hidden < -1) {
    throw ConfigError("extra hidden layers must be at least -1");
  }
  const std::size_t hidden = spec.widths.size() >= 2 ? spec.widths.size() - 2 : 0;
  if (extra_hidden == -1) {
    if (hidden == 0) {
      throw ConfigError("cannot remove a hidden layer from a network without one");
    }
    spec.widths.erase(spec.widths.end() - 2);
    return spec;
  }
  if (extra_hidden > 0 && hidden == 0) {
    throw ConfigError("cannot repeat the hidden block of a network without hidden layers");
  }
  const std::size_t w = spec.widths[spec.widths.size() - 2];
  spec.widths.insert(spec.widths.end() - 1, static_cast<std::size_t>(extra_hidden), w);
  return spec;
}

TaskData load_task(const ExperimentSpec& spec, const std::filesystem::path& data_dir) {
  if (spec.task == Task::Iris) {
    const Dataset all = load_iris(data_dir / "iris.csv");
    auto [train, test] = train_test_split(all, spec.split);
    return {std::move(train), std::move(test)};
  }
  const auto dir = data_dir / "mnist";
  return {load_mnist5(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte"),
          load_mnist5(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte")};
}

Network RunRecord::network_at(std::size_t checkpoint) const {
  const auto& c = checkpoints.at(checkpoint);
  std::vector<DenseLayer> layers;
  for (const auto& w : c.weights) {
    layers.push_back({w, spec.activation});
  }
  return Network(std::move(layers));
}

namespace {

Checkpoint measure_checkpoint(const Network& net, const ExperimentSpec& spec, const TaskData& data,
                              std::size_t epoch) {
  Checkpoint c;
  c.epoch = epoch;
  c.train_loss = mse_loss(net, data.train.features, data.train.targets);
  c.test_loss = mse_loss(net, data.test.features, data.test.targets);
  c.train_accuracy = accuracy(net, data.train.features, data.train.targets);
  c.test_accuracy = accuracy(net, data.test.features, data.test.targets);
  for (std::size_t k = 0; k < net.depth(); ++k) {
    c.layers.push_back(measure_all(slice_of(net, k), spec.perturbation));
    c.weights.push_back(net.layer(k).weights);
  }
  return c;
}

void check_data(const ExperimentSpec& spec, const TaskData& data) {
  for (const Dataset* ds : {&data.train, &data.test}) {
    if (ds->size() == 0) {
      throw EmptyDataError("dataset '" + ds->name + "' has no rows");
    }
    if (ds->features.cols() != spec.widths.front() || ds->targets.cols() != spec.widths.back()) {
      throw DimensionError("dataset '" + ds->name + "' does not match the architecture widths");
    }
  }
}

} // namespace

RunRecord train_run(const ExperimentSpec& spec, const TaskData& data, const Progress& progress) {
  spec.validate();
  check_data(spec, data);
  RunRecord rec{spec, {}};
  Network net = make_network(spec.widths, spec.activation, spec.init_scale, spec.train.seed);
  rec.checkpoints.push_back(measure_checkpoint(net, spec, data, 0));
  for (std::size_t e = 1; e <= spec.train.epochs; ++e) {
    train_epoch(net, data.train.features, data.train.targets, spec.train, e - 1);
    if (e % spec.measure_every == 0 || e == spec.train.epochs) {
      rec.checkpoints.push_back(measure_checkpoint(net, spec, data, e));
      if (progress) {
        progress(std::string(to_string(spec.task)) + " seed " + std::to_string(spec.train.seed) +
                 ": epoch " + std::to_string(e) + "/" + std::to_string(spec.train.epochs) +
                 " train loss " + std::to_string(rec.checkpoints.back().train_loss));
      }
    }
  }
  return rec;
}

std::vector<RunRecord> train_runs(const ExperimentSpec& spec, const TaskData& data,
                                  const Progress& progress) {
  spec.validate();
  check_data(spec, data);
  const std::size_t workers = resolve_workers(spec.perturbation.workers);
  const std::size_t parallel_runs = std::min(workers, spec.runs);
  ExperimentSpec base = spec;
  // Split the thread budget between concurrent runs; results do not depend on it.
  base.perturbation.workers = std::max<std::size_t>(1, workers / parallel_runs);
  std::mutex log_mu;
  Progress locked;
  if (progress) {
    locked = [&](const std::string& msg) {
      std::lock_guard lock(log_mu);
      progress(msg);
    };
  }
  auto make = [] { return std::vector<std::pair<std::size_t, RunRecord>>{}; };
  auto work = [&](std::vector<std::pair<std::size_t, RunRecord>>& out, std::uint64_t b,
                  std::uint64_t e) {
    for (std::uint64_t k = b; k < e; ++k) {
      ExperimentSpec s = base;
      s.train.seed = spec.train.seed + k;
      RunRecord r = train_run(s, data, locked);
      r.spec.perturbation.workers = spec.perturbation.workers;
      out.emplace_back(k, std::move(r));
    }
  };
  auto shards = run_sharded(0, spec.runs, parallel_runs, make, work);
  std::vector<RunRecord> out;
  for (auto& s : shards) {
    for (auto& [k, r] : s) {
      out.push_back(std::move(r));
    }
  }
  return out;
}

LayerSlice edge_slice(Activation a, double w) {
  return make_slice(Matrix(1, 1, w), a, perturbation_range(a));
}

LayerSlice pair_slice(Activation a, double w_a, double w_b) {
  return make_slice(Matrix(1, 2, std::vector<double>{w_a, w_b}), a, perturbation_range(a));
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t steps) {
  if (steps < 2) {
    throw ConfigError("a grid needs at least 2 steps");
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw ConfigError("grid bounds must be finite");
  }
  std::vector<double> out(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(steps - 1);
  }
  return out;
}

std::vector<EdgePoint> sweep_edge(Activation a, double w_min, double w_max, std::size_t steps,
                                  const PerturbationConfig& cfg) {
  std::vector<EdgePoint> out;
  for (double w : uniform_grid(w_min, w_max, steps)) {
    out.push_back({w, ei_joint(edge_slice(a, w), cfg)});
  }
  return out;
}

std::size_t argmax_ei(const std::vector<EdgePoint>& curve) {
  if (curve.empty()) {
    throw EmptyDataError("empty EI curve");
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < curve.size(); ++k) {
    if (curve[k].ei > curve[best].ei) {
      best = k;
    }
  }
  return best;
}

Manifold sweep_manifold(Activation a, const ManifoldGrid& grid, const PerturbationConfig& cfg,
                        bool with_causal_plane) {
  Manifold m;
  m.a_values = uniform_grid(grid.a_min, grid.a_max, grid.a_steps);
  m.b_values = uniform_grid(grid.b_min, grid.b_max, grid.b_steps);
  m.ei = Matrix(grid.a_steps, grid.b_steps);
  if (with_causal_plane) {
    m.sensitivity = Matrix(grid.a_steps, grid.b_steps);
    m.degeneracy = Matrix(grid.a_steps, grid.b_steps);
  }
  for (std::size_t i = 0; i < grid.a_steps; ++i) {
    for (std::size_t j = 0; j < grid.b_steps; ++j) {
      const LayerSlice s = pair_slice(a, m.a_values[i], m.b_values[j]);
      const double ei = ei_joint(s, cfg);
      m.ei(i, j) = ei;
      if (with_causal_plane) {
        const double sens = sensitivity(s, cfg);
        m.sensitivity(i, j) = sens;
        m.degeneracy(i, j) = degeneracy(sens, ei);
      }
    }
  }
  return m;
}

std::vector<CausalPlanePoint> causal_plane_series(const RunRecord& record,
                                                  std::vector<std::string>* warnings) {
  if (record.checkpoints.empty()) {
    throw EmptyDataError("run record has no checkpoints");
  }
  const std::size_t layers = record.checkpoints.front().layers.size();
  std::vector<CausalPlanePoint> out;
  for (std::size_t l = 0; l < layers; ++l) {
    std::size_t skipped = 0;
    for (const auto& c : record.checkpoints) {
      const EIResult& r = c.layers.at(l);
      if (!r.ei || !r.degeneracy) {
        ++skipped;
        continue;
      }
      out.push_back({l, c.epoch, *r.degeneracy, r.sensitivity});
    }
    if (skipped > 0 && warnings != nullptr) {
      warnings->push_back("layer " + std::to_string(l) + ": joint EI absent at " +
                          std::to_string(skipped) + " checkpoint(s); omitted from the causal plane");
    }
  }
  return out;
}

double path_length(const std::vector<CausalPlanePoint>& points, std::size_t layer_index) {
  double len = 0.0;
  const CausalPlanePoint* prev = nullptr;
  for (const auto& p : points) {
    if (p.layer_index != layer_index) {
      continue;
    }
    if (prev != nullptr) {
      len += std::hypot(p.x - prev->x, p.y - prev->y);
    }
    prev = &p;
  }
  return len;
}

} // namespace eiprobe
