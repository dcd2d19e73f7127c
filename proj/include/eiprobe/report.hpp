#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "eiprobe/harness.hpp"

namespace eiprobe {

// Number of trailing checkpoints making up the last `fraction` of a run
// (at least one).
std::size_t tail_count(std::size_t checkpoints, double fraction = 0.1);

// Mean phi of one layer over the last 10% of checkpoints; absent if the layer
// has no joint EI there.
std::optional<double> mean_tail_phi(const RunRecord& record, std::size_t layer);

// Mean of mean_tail_phi over the transitions into hidden layers (every
// transition except the last).
std::optional<double> mean_hidden_phi(const RunRecord& record);

struct LayerSummary {
  std::size_t layer = 0;
  EIResult final;
  std::optional<double> mean_phi_tail;
};

struct RunSummary {
  Task task = Task::Iris;
  std::uint64_t train_seed = 0;
  std::size_t final_epoch = 0;
  double final_train_loss = 0.0;
  double final_test_loss = 0.0;
  double final_test_accuracy = 0.0;
  std::vector<LayerSummary> layers;
  std::optional<double> hidden_phi;
};

struct TaskComparison {
  std::optional<double> iris_hidden_phi;   // mean across iris runs
  std::optional<double> mnist5_hidden_phi; // mean across mnist5 runs
};

struct Report {
  std::vector<RunSummary> runs;
  std::optional<TaskComparison> comparison; // present when both tasks appear
};

RunSummary summarize_run(const RunRecord& record);
Report build_report(const std::vector<RunRecord>& records);

void write_report_csv(std::ostream& out, const Report& report);
void write_report_text(std::ostream& out, const Report& report);

} // namespace eiprobe
