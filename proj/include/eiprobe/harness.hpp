#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "eiprobe/activation.hpp"
#include "eiprobe/datasets.hpp"
#include "eiprobe/ei.hpp"
#include "eiprobe/matrix.hpp"
#include "eiprobe/network.hpp"

namespace eiprobe {

enum class Task : std::uint8_t { Iris, Mnist5 };

std::string_view to_string(Task t);
Task parse_task(std::string_view name);

struct ExperimentSpec {
  Task task = Task::Iris;
  std::vector<std::size_t> widths; // node widths, input first
  Activation activation = Activation::Sigmoid;
  double init_scale = 1.0;
  TrainConfig train;
  std::size_t measure_every = 1; // epochs between checkpoints
  PerturbationConfig perturbation;
  std::size_t runs = 1;
  SplitSpec split; // only used for tasks without a separate test file

  void validate() const;
  bool operator==(const ExperimentSpec&) const = default;
};

// iris: [4,5,5,3], lr 0.01, batch 10, 4000 epochs, checkpoint every 40.
// mnist5: [25,6,6,5], lr 0.01, batch 50, 500 epochs, checkpoint every 5.
// Both: sigmoid, fan-in init scale 1, 10^6 perturbation samples at 8 bins,
// 3 runs; `seed` seeds training and perturbation.
ExperimentSpec canonical_spec(Task task, std::uint64_t seed = 1);

// Repeats the last hidden width `extra_hidden` more times, or removes the
// last hidden layer for -1.
ExperimentSpec redundant_layer_variant(ExperimentSpec spec, int extra_hidden);

struct TaskData {
  Dataset train;
  Dataset test;
};

// iris: <dir>/iris.csv split by spec.split. mnist5: <dir>/mnist/train-* for
// training and <dir>/mnist/t10k-* for testing.
TaskData load_task(const ExperimentSpec& spec, const std::filesystem::path& data_dir);

struct Checkpoint {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double test_loss = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::vector<EIResult> layers;  // one per layer transition
  std::vector<Matrix> weights;   // snapshot the layers were measured on

  bool operator==(const Checkpoint&) const = default;
};

struct RunRecord {
  ExperimentSpec spec;
  std::vector<Checkpoint> checkpoints; // ascending epoch

  Network network_at(std::size_t checkpoint) const;
  bool operator==(const RunRecord&) const = default;
};

using Progress = std::function<void(const std::string&)>;

// One training run using spec.train.seed and spec.perturbation.seed.
// Checkpoints at epoch 0, every measure_every epochs, and the final epoch.
RunRecord train_run(const ExperimentSpec& spec, const TaskData& data,
                    const Progress& progress = {});

// spec.runs runs with training seeds spec.train.seed + k; the perturbation
// seed is shared. Runs execute concurrently.
std::vector<RunRecord> train_runs(const ExperimentSpec& spec, const TaskData& data,
                                  const Progress& progress = {});

// 1->1 slice of one activation kind, input perturbed over its own range.
LayerSlice edge_slice(Activation a, double w);
// 2->1 slice with weights (w_a, w_b).
LayerSlice pair_slice(Activation a, double w_a, double w_b);

struct EdgePoint {
  double w = 0.0;
  double ei = 0.0;
};

// w_k = w_min + (w_max - w_min) * k / (steps - 1).
std::vector<double> uniform_grid(double lo, double hi, std::size_t steps);

std::vector<EdgePoint> sweep_edge(Activation a, double w_min, double w_max, std::size_t steps,
                                  const PerturbationConfig& cfg);

std::size_t argmax_ei(const std::vector<EdgePoint>& curve);

struct ManifoldGrid {
  double a_min = -8.0, a_max = 8.0;
  std::size_t a_steps = 17;
  double b_min = -8.0, b_max = 8.0;
  std::size_t b_steps = 17;
};

struct Manifold {
  std::vector<double> a_values;
  std::vector<double> b_values;
  Matrix ei;          // (a_steps x b_steps)
  Matrix sensitivity; // empty unless requested
  Matrix degeneracy;  // empty unless requested
};

Manifold sweep_manifold(Activation a, const ManifoldGrid& grid, const PerturbationConfig& cfg,
                        bool with_causal_plane = false);

struct CausalPlanePoint {
  std::size_t layer_index = 0;
  std::size_t epoch = 0;
  double x = 0.0; // degeneracy
  double y = 0.0; // sensitivity
};

// Points ordered by layer, then epoch. Layers lacking joint EI at a
// checkpoint are skipped there; a warning per skipped layer is appended to
// `warnings` when given.
std::vector<CausalPlanePoint> causal_plane_series(const RunRecord& record,
                                                  std::vector<std::string>* warnings = nullptr);

// Sum of Euclidean distances between consecutive points of one layer.
double path_length(const std::vector<CausalPlanePoint>& points, std::size_t layer_index);

} // namespace eiprobe
