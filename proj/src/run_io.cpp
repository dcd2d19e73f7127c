#include "eiprobe/run_io.hpp"

#include <fstream>
#include <ostream>

#include <json.hpp>

#include "eiprobe/errors.hpp"
#include "eiprobe/format.hpp"

namespace eiprobe {

using nlohmann::json;

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j) {
  if (j.is_null()) {
    return std::nullopt;
  }
  return j.get<double>();
}

json spec_json(const ExperimentSpec& s) {
  return {
      {"task", to_string(s.task)},
      {"widths", s.widths},
      {"activation", to_string(s.activation)},
      {"init_scale", s.init_scale},
      {"learning_rate", s.train.learning_rate},
      {"batch_size", s.train.batch_size},
      {"epochs", s.train.epochs},
      {"train_seed", s.train.seed},
      {"measure_every", s.measure_every},
      {"samples", s.perturbation.samples},
      {"bins", s.perturbation.bins},
      {"perturbation_seed", s.perturbation.seed},
      {"runs", s.runs},
      {"test_fraction", s.split.test_fraction},
      {"split_seed", s.split.seed},
  };
}

ExperimentSpec spec_from(const json& j) {
  ExperimentSpec s;
  s.task = parse_task(j.at("task").get<std::string>());
  s.widths = j.at("widths").get<std::vector<std::size_t>>();
  s.activation = parse_activation(j.at("activation").get<std::string>());
  s.init_scale = j.at("init_scale").get<double>();
  s.train.learning_rate = j.at("learning_rate").get<double>();
  s.train.batch_size = j.at("batch_size").get<std::size_t>();
  s.train.epochs = j.at("epochs").get<std::size_t>();
  s.train.seed = j.at("train_seed").get<std::uint64_t>();
  s.measure_every = j.at("measure_every").get<std::size_t>();
  s.perturbation.samples = j.at("samples").get<std::uint64_t>();
  s.perturbation.bins = j.at("bins").get<std::size_t>();
  s.perturbation.seed = j.at("perturbation_seed").get<std::uint64_t>();
  s.runs = j.at("runs").get<std::size_t>();
  s.split.test_fraction = j.at("test_fraction").get<double>();
  s.split.seed = j.at("split_seed").get<std::uint64_t>();
  return s;
}

json ei_json(const EIResult& r) {
  return {
      {"ei", opt(r.ei)},
      {"ei_parts", r.ei_parts},
      {"sensitivity", r.sensitivity},
      {"degeneracy", opt(r.degeneracy)},
      {"phi", opt(r.phi)},
      {"samples", r.samples_used},
      {"bins", r.bins},
      {"seed", r.seed},
  };
}

EIResult ei_from(const json& j) {
  EIResult r;
  r.ei = opt_from(j.at("ei"));
  r.ei_parts = j.at("ei_parts").get<double>();
  r.sensitivity = j.at("sensitivity").get<double>();
  r.degeneracy = opt_from(j.at("degeneracy"));
  r.phi = opt_from(j.at("phi"));
  r.samples_used = j.at("samples").get<std::uint64_t>();
  r.bins = j.at("bins").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  }
  return rows;
}

Matrix matrix_from(const json& j) {
  const std::size_t rows = j.size();
  const std::size_t cols = rows == 0 ? 0 : j.at(0).size();
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = j.at(r).get<std::vector<double>>();
    if (row.size() != cols) {
      throw DimensionError("ragged weight matrix");
    }
    std::ranges::copy(row, m.row(r).begin());
  }
  return m;
}

} // namespace

void write_run_jsonl(std::ostream& out, const RunRecord& record) {
  const json header{{"schema", kRunSchema}, {"version", kSchemaVersion},
                    {"spec", spec_json(record.spec)}};
  out << header.dump() << '\n';
  for (const auto& c : record.checkpoints) {
    json layers = json::array();
    for (const auto& r : c.layers) {
      layers.push_back(ei_json(r));
    }
    json weights = json::array();
    for (const auto& w : c.weights) {
      weights.push_back(matrix_json(w));
    }
    const json line{{"epoch", c.epoch},
                    {"train_loss", c.train_loss},
                    {"test_loss", c.test_loss},
                    {"train_accuracy", c.train_accuracy},
                    {"test_accuracy", c.test_accuracy},
                    {"layers", layers},
                    {"weights", weights}};
    out << line.dump() << '\n';
  }
}

void save_run_jsonl(const std::filesystem::path& path, const RunRecord& record) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write run record to '" + path.string() + "'");
  }
  write_run_jsonl(out, record);
}

RunRecord read_run_jsonl(std::istream& in) {
  RunRecord rec;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) {
      continue;
    }
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed run record line: ") + e.what(), lineno);
    }
    try {
      if (!have_header) {
        if (!j.contains("schema") || j.at("schema") != kRunSchema) {
          throw UnsupportedVersionError("not an eiprobe run record (missing schema " +
                                        std::string(kRunSchema) + ")");
        }
        const int v = j.at("version").get<int>();
        if (v != kSchemaVersion) {
          throw UnsupportedVersionError("run record schema version " + std::to_string(v) +
                                        " is not supported (expected " +
                                        std::to_string(kSchemaVersion) + ")");
        }
        rec.spec = spec_from(j.at("spec"));
        have_header = true;
        continue;
      }
      Checkpoint c;
      c.epoch = j.at("epoch").get<std::size_t>();
      c.train_loss = j.at("train_loss").get<double>();
      c.test_loss = j.at("test_loss").get<double>();
      c.train_accuracy = j.at("train_accuracy").get<double>();
      c.test_accuracy = j.at("test_accuracy").get<double>();
      for (const auto& l : j.at("layers")) {
        c.layers.push_back(ei_from(l));
      }
      for (const auto& w : j.at("weights")) {
        c.weights.push_back(matrix_from(w));
      }
      if (!rec.checkpoints.empty() && c.epoch <= rec.checkpoints.back().epoch) {
        throw ParseError("checkpoints out of epoch order", lineno);
      }
      rec.checkpoints.push_back(std::move(c));
    } catch (const json::exception& e) {
      throw ParseError(std::string("invalid run record field: ") + e.what(), lineno);
    } catch (const ConfigError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  if (!have_header) {
    throw EmptyDataError("run record has no header line");
  }
  return rec;
}

RunRecord load_run_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open run record '" + path.string() + "'");
  }
  try {
    return read_run_jsonl(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  } catch (const UnsupportedVersionError& e) {
    throw UnsupportedVersionError(path.string() + ": " + e.what());
  }
}

void write_run_csv(std::ostream& out, const RunRecord& record) {
  out << schema_comment("run-csv") << '\n';
  out << "task,train_seed,epoch,layer,train_loss,test_loss,train_accuracy,test_accuracy,"
         "ei,ei_parts,sensitivity,degeneracy,phi,samples,bins,perturbation_seed\n";
  for (const auto& c : record.checkpoints) {
    for (std::size_t l = 0; l < c.layers.size(); ++l) {
      const auto& r = c.layers[l];
      out << to_string(record.spec.task) << ',' << record.spec.train.seed << ',' << c.epoch << ','
          << l << ',' << format_double(c.train_loss) << ',' << format_double(c.test_loss) << ','
          << format_double(c.train_accuracy) << ',' << format_double(c.test_accuracy) << ','
          << format_optional(r.ei) << ',' << format_double(r.ei_parts) << ','
          << format_double(r.sensitivity) << ',' << format_optional(r.degeneracy) << ','
          << format_optional(r.phi) << ',' << r.samples_used << ',' << r.bins << ',' << r.seed
          << '\n';
    }
  }
}

void write_ei_csv(std::ostream& out, const std::vector<EIResult>& layers,
                  std::size_t first_layer) {
  out << schema_comment("ei-csv") << '\n';
  out << "layer,ei,ei_parts,sensitivity,degeneracy,phi,samples,bins,seed\n";
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& r = layers[l];
    out << first_layer + l << ',' << format_optional(r.ei) << ',' << format_double(r.ei_parts) << ','
        << format_double(r.sensitivity) << ',' << format_optional(r.degeneracy) << ','
        << format_optional(r.phi) << ',' << r.samples_used << ',' << r.bins << ',' << r.seed
        << '\n';
  }
}

} // namespace eiprobe
