#include "eiprobe/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "eiprobe/errors.hpp"
#include "eiprobe/format.hpp"

namespace eiprobe {

std::size_t tail_count(std::size_t checkpoints, double fraction) {
  if (checkpoints == 0) {
    return 0;
  }
  const auto n = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(checkpoints)));
  return std::clamp<std::size_t>(n, 1, checkpoints);
}

std::optional<double> mean_tail_phi(const RunRecord& record, std::size_t layer) {
  const auto& cps = record.checkpoints;
  const std::size_t n = tail_count(cps.size());
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = cps.size() - n; k < cps.size(); ++k) {
    const auto& phi = cps[k].layers.at(layer).phi;
    if (phi) {
      sum += *phi;
      ++count;
    }
  }
  if (count == 0) {
    return std::nullopt;
  }
  return sum / static_cast<double>(count);
}

std::optional<double> mean_hidden_phi(const RunRecord& record) {
  if (record.checkpoints.empty()) {
    throw EmptyDataError("run record has no checkpoints");
  }
  const std::size_t transitions = record.checkpoints.front().layers.size();
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < transitions; ++l) {
    if (auto phi = mean_tail_phi(record, l)) {
      sum += *phi;
      ++count;
    }
  }
  if (count == 0) {
    return std::nullopt;
  }
  return sum / static_cast<double>(count);
}

RunSummary summarize_run(const RunRecord& record) {
  if (record.checkpoints.empty()) {
    throw EmptyDataError("run record has no checkpoints");
  }
  const auto& last = record.checkpoints.back();
  RunSummary s;
  s.task = record.spec.task;
  s.train_seed = record.spec.train.seed;
  s.final_epoch = last.epoch;
  s.final_train_loss = last.train_loss;
  s.final_test_loss = last.test_loss;
  s.final_test_accuracy = last.test_accuracy;
  for (std::size_t l = 0; l < last.layers.size(); ++l) {
    s.layers.push_back({l, last.layers[l], mean_tail_phi(record, l)});
  }
  s.hidden_phi = mean_hidden_phi(record);
  return s;
}

namespace {

std::optional<double> task_mean(const std::vector<RunSummary>& runs, Task t) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : runs) {
    if (r.task == t && r.hidden_phi) {
      sum += *r.hidden_phi;
      ++n;
    }
  }
  if (n == 0) {
    return std::nullopt;
  }
  return sum / static_cast<double>(n);
}

std::string text_opt(const std::optional<double>& v) {
  if (!v) {
    return "n/a";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

} // namespace

Report build_report(const std::vector<RunRecord>& records) {
  if (records.empty()) {
    throw EmptyDataError("report needs at least one run record");
  }
  Report rep;
  bool iris = false, mnist = false;
  for (const auto& r : records) {
    rep.runs.push_back(summarize_run(r));
    iris |= r.spec.task == Task::Iris;
    mnist |= r.spec.task == Task::Mnist5;
  }
  if (iris && mnist) {
    rep.comparison = TaskComparison{task_mean(rep.runs, Task::Iris),
                                    task_mean(rep.runs, Task::Mnist5)};
  }
  return rep;
}

void write_report_csv(std::ostream& out, const Report& report) {
  out << schema_comment("report-csv") << '\n';
  out << "row,task,train_seed,layer,final_epoch,final_train_loss,final_test_loss,"
         "final_test_accuracy,ei,ei_parts,sensitivity,degeneracy,phi,mean_phi_last10,"
         "iris_hidden_phi,mnist5_hidden_phi\n";
  for (const auto& r : report.runs) {
    for (const auto& l : r.layers) {
      out << "layer," << to_string(r.task) << ',' << r.train_seed << ',' << l.layer << ','
          << r.final_epoch << ',' << format_double(r.final_train_loss) << ','
          << format_double(r.final_test_loss) << ',' << format_double(r.final_test_accuracy)
          << ',' << format_optional(l.final.ei) << ',' << format_double(l.final.ei_parts) << ','
          << format_double(l.final.sensitivity) << ',' << format_optional(l.final.degeneracy)
          << ',' << format_optional(l.final.phi) << ',' << format_optional(l.mean_phi_tail)
          << ",,\n";
    }
  }
  if (report.comparison) {
    out << "comparison,,,hidden,,,,,,,,,,," << format_optional(report.comparison->iris_hidden_phi)
        << ',' << format_optional(report.comparison->mnist5_hidden_phi) << '\n';
  }
}

void write_report_text(std::ostream& out, const Report& report) {
  for (const auto& r : report.runs) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "%s seed %llu: epoch %zu  train loss %.5f  test loss %.5f  test acc %.3f\n",
                  std::string(to_string(r.task)).c_str(),
                  static_cast<unsigned long long>(r.train_seed), r.final_epoch, r.final_train_loss,
                  r.final_test_loss, r.final_test_accuracy);
    out << buf;
    for (const auto& l : r.layers) {
      out << "  layer " << l.layer << ": ei " << text_opt(l.final.ei) << "  ei_parts "
          << text_opt(l.final.ei_parts) << "  sensitivity " << text_opt(l.final.sensitivity)
          << "  degeneracy " << text_opt(l.final.degeneracy) << "  phi "
          << text_opt(l.final.phi) << "  mean phi (last 10%) " << text_opt(l.mean_phi_tail)
          << '\n';
    }
    out << "  mean hidden-layer phi (last 10%): " << text_opt(r.hidden_phi) << '\n';
  }
  if (report.comparison) {
    out << "comparison: mean hidden-layer phi  iris " << text_opt(report.comparison->iris_hidden_phi)
        << "  mnist5 " << text_opt(report.comparison->mnist5_hidden_phi) << '\n';
  }
}

} // namespace eiprobe
