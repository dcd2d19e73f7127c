#include "eiprobe/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "eiprobe/convergence.hpp"
#include "eiprobe/errors.hpp"
#include "eiprobe/format.hpp"
#include "eiprobe/harness.hpp"
#include "eiprobe/plot.hpp"
#include "eiprobe/report.hpp"
#include "eiprobe/run_io.hpp"
#include "eiprobe/weights_io.hpp"

namespace eiprobe {

namespace {

// Flags shared by every verb that measures.
struct MeasureFlags {
  std::uint64_t samples = 0;
  std::size_t bins = 0;
  std::uint64_t seed = 0;
  std::size_t threads = 0;

  void add(CLI::App* app) {
    app->add_option("--samples", samples, "perturbation samples")
        ->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 40))
        ->capture_default_str();
    app->add_option("--bins", bins, "bins per node")
        ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 16))
        ->capture_default_str();
    app->add_option("--seed", seed, "perturbation seed")->capture_default_str();
    add_threads(app);
  }
  void add_threads(CLI::App* app) {
    app->add_option("--threads", threads, "worker threads (0 = EI_PROBE_THREADS or all cores)")
        ->capture_default_str();
  }
  PerturbationConfig config() const { return {samples, bins, seed, threads}; }
};

// Where a verb's primary data goes.
struct Sink {
  std::string out;
  bool to_stdout = false;

  void add(CLI::App* app, const std::string& what) {
    app->add_option("--out", out, "output " + what);
    app->add_flag("--stdout", to_stdout, "write the " + what + " to standard output");
  }
  void require(const std::string& verb) const {
    if (out.empty() && !to_stdout) {
      throw CLI::RequiredError(verb + ": --out is required (or --stdout)");
    }
  }
  void write(const std::string& content, std::ostream& stdout_stream) const {
    if (to_stdout) {
      stdout_stream << content;
    }
    if (!out.empty()) {
      write_text_file(out, content);
    }
  }
};

Activation activation_flag(const std::string& name, const char* flag) {
  try {
    return parse_activation(name);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(flag) + ": " + e.what());
  }
}

// Inserts ".seed<k>" before the extension when several runs share --out.
std::string run_path(const std::string& out, std::uint64_t seed, bool several) {
  if (!several) {
    return out;
  }
  std::filesystem::path p(out);
  const std::string name = p.stem().string() + ".seed" + std::to_string(seed) + p.extension().string();
  return (p.parent_path() / name).string();
}

struct Verb {
  CLI::App* app;
  std::function<void()> run;
};

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Effective-information probes for small feedforward networks", "eiprobe"};
  app.require_subcommand(1);
  std::vector<Verb> verbs;

  // sweep-edge
  struct {
    std::string activation;
    double wmin = 0.0, wmax = 8.0;
    std::size_t steps = 161;
    MeasureFlags m{100'000, 64, 1, 0};
    Sink sink;
    std::string plot;
  } se;
  {
    auto* c = app.add_subcommand("sweep-edge", "EI of a single edge over a grid of weights");
    c->add_option("--activation", se.activation, "sigmoid, tanh or relu")->required();
    c->add_option("--wmin", se.wmin)->capture_default_str();
    c->add_option("--wmax", se.wmax)->capture_default_str();
    c->add_option("--steps", se.steps)->check(CLI::Range(std::size_t{2}, std::size_t{1} << 24))
        ->capture_default_str();
    se.m.add(c);
    se.sink.add(c, "CSV");
    c->add_option("--plot", se.plot, "SVG line plot path");
    verbs.push_back({c, [&] {
      se.sink.require("sweep-edge");
      const Activation a = activation_flag(se.activation, "--activation");
      const auto cfg = se.m.config();
      err << "sweep-edge: " << se.steps << " weights, " << cfg.samples << " samples, " << cfg.bins
          << " bins\n";
      const auto curve = sweep_edge(a, se.wmin, se.wmax, se.steps, cfg);
      std::ostringstream csv;
      csv << schema_comment("sweep-edge") << "\nw,ei\n";
      Series s{std::string(to_string(a)), {}};
      for (const auto& p : curve) {
        csv << format_double(p.w) << ',' << format_double(p.ei) << '\n';
        s.points.emplace_back(p.w, p.ei);
      }
      se.sink.write(csv.str(), out);
      const auto& peak = curve[argmax_ei(curve)];
      err << "sweep-edge: peak EI " << peak.ei << " bits at w = " << peak.w << '\n';
      if (!se.plot.empty()) {
        emit_line_plot({s}, {"EI of a single edge", "weight", "EI (bits)"}, se.plot);
      }
    }});
  }

  // sweep-manifold
  struct {
    std::string activation;
    double lo = -8.0, hi = 8.0;
    std::size_t steps = 17;
    bool causal = false;
    MeasureFlags m{100'000, 8, 1, 0};
    Sink sink;
    std::string plot;
  } sm;
  {
    auto* c = app.add_subcommand("sweep-manifold", "EI of a 2->1 layer over a square weight grid");
    c->add_option("--activation", sm.activation, "sigmoid, tanh or relu")->required();
    c->add_option("--min", sm.lo, "lower bound for both weights")->capture_default_str();
    c->add_option("--max", sm.hi, "upper bound for both weights")->capture_default_str();
    c->add_option("--steps", sm.steps, "grid points per axis")
        ->check(CLI::Range(std::size_t{2}, std::size_t{4096}))
        ->capture_default_str();
    c->add_flag("--causal-plane", sm.causal, "also measure sensitivity and degeneracy");
    sm.m.add(c);
    sm.sink.add(c, "CSV");
    c->add_option("--plot", sm.plot, "SVG heatmap path");
    verbs.push_back({c, [&] {
      sm.sink.require("sweep-manifold");
      const Activation a = activation_flag(sm.activation, "--activation");
      const ManifoldGrid grid{sm.lo, sm.hi, sm.steps, sm.lo, sm.hi, sm.steps};
      err << "sweep-manifold: " << sm.steps << "x" << sm.steps << " grid\n";
      const Manifold mf = sweep_manifold(a, grid, sm.m.config(), sm.causal);
      std::ostringstream csv;
      csv << schema_comment("sweep-manifold") << "\nw_a,w_b,ei"
          << (sm.causal ? ",sensitivity,degeneracy" : "") << '\n';
      for (std::size_t i = 0; i < sm.steps; ++i) {
        for (std::size_t j = 0; j < sm.steps; ++j) {
          csv << format_double(mf.a_values[i]) << ',' << format_double(mf.b_values[j]) << ','
              << format_double(mf.ei(i, j));
          if (sm.causal) {
            csv << ',' << format_double(mf.sensitivity(i, j)) << ','
                << format_double(mf.degeneracy(i, j));
          }
          csv << '\n';
        }
      }
      sm.sink.write(csv.str(), out);
      if (!sm.plot.empty()) {
        emit_heatmap(mf.ei, mf.a_values, mf.b_values, {"EI manifold", "w_a", "w_b"}, sm.plot);
      }
    }});
  }

  // train
  struct {
    std::string task;
    std::uint64_t seed = 1;
    std::size_t runs = 1;
    std::size_t epochs = 0, measure_every = 0, batch = 0;
    double lr = 0.0, init_scale = 0.0;
    std::string activation;
    int extra_hidden = 0;
    MeasureFlags m;
    std::string data = "data";
    Sink sink;
    std::string csv, plot, weights_out;
    CLI::Option *o_epochs, *o_every, *o_batch, *o_lr, *o_scale, *o_samples, *o_bins, *o_pseed;
  } tr;
  {
    auto* c = app.add_subcommand("train", "train networks with periodic EI measurement");
    c->add_option("--task", tr.task, "iris or mnist5")->required();
    c->add_option("--seed", tr.seed, "training seed of the first run")->capture_default_str();
    c->add_option("--runs", tr.runs, "number of runs (seeds seed, seed+1, ...)")
        ->check(CLI::Range(std::size_t{1}, std::size_t{1000}))
        ->capture_default_str();
    tr.o_epochs = c->add_option("--epochs", tr.epochs);
    tr.o_every = c->add_option("--measure-every", tr.measure_every, "epochs between checkpoints")
                     ->check(CLI::PositiveNumber);
    tr.o_batch = c->add_option("--batch", tr.batch)->check(CLI::PositiveNumber);
    tr.o_lr = c->add_option("--lr", tr.lr)->check(CLI::NonNegativeNumber);
    tr.o_scale = c->add_option("--init-scale", tr.init_scale)->check(CLI::PositiveNumber);
    c->add_option("--activation", tr.activation, "sigmoid, tanh or relu");
    c->add_option("--extra-hidden", tr.extra_hidden,
                  "repeat the last hidden layer this many more times (-1 removes it)")
        ->check(CLI::Range(-1, 64))
        ->capture_default_str();
    tr.o_samples = c->add_option("--samples", tr.m.samples, "perturbation samples per checkpoint")
                       ->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 40));
    tr.o_bins = c->add_option("--bins", tr.m.bins)->check(CLI::Range(std::size_t{2}, std::size_t{1} << 16));
    tr.o_pseed = c->add_option("--perturb-seed", tr.m.seed, "perturbation seed (default: --seed)");
    tr.m.add_threads(c);
    c->add_option("--data", tr.data, "data directory")->capture_default_str();
    tr.sink.add(c, "run record (JSONL)");
    c->add_option("--csv", tr.csv, "flat CSV export path");
    c->add_option("--plot", tr.plot, "SVG plot of EI per layer");
    c->add_option("--weights-out", tr.weights_out, "final weights path");
    verbs.push_back({c, [&] {
      tr.sink.require("train");
      ExperimentSpec spec = canonical_spec(parse_task(tr.task), tr.seed);
      spec.runs = tr.runs;
      if (*tr.o_epochs) spec.train.epochs = tr.epochs;
      if (*tr.o_every) spec.measure_every = tr.measure_every;
      if (*tr.o_batch) spec.train.batch_size = tr.batch;
      if (*tr.o_lr) spec.train.learning_rate = tr.lr;
      if (*tr.o_scale) spec.init_scale = tr.init_scale;
      if (*tr.o_samples) spec.perturbation.samples = tr.m.samples;
      if (*tr.o_bins) spec.perturbation.bins = tr.m.bins;
      if (*tr.o_pseed) spec.perturbation.seed = tr.m.seed;
      if (!tr.activation.empty()) spec.activation = activation_flag(tr.activation, "--activation");
      spec.perturbation.workers = tr.m.threads;
      spec = redundant_layer_variant(spec, tr.extra_hidden);
      spec.validate();
      const TaskData data = load_task(spec, tr.data);
      err << "train: " << to_string(spec.task) << ", " << data.train.size() << " train / "
          << data.test.size() << " test rows\n";
      const auto records = train_runs(spec, data, [&](const std::string& m) { err << m << '\n'; });
      const bool several = records.size() > 1;
      for (const auto& rec : records) {
        std::ostringstream jsonl;
        write_run_jsonl(jsonl, rec);
        const std::uint64_t s = rec.spec.train.seed;
        Sink sink{tr.sink.out.empty() ? "" : run_path(tr.sink.out, s, several), tr.sink.to_stdout};
        sink.write(jsonl.str(), out);
        if (!tr.csv.empty()) {
          std::ostringstream csv;
          write_run_csv(csv, rec);
          write_text_file(run_path(tr.csv, s, several), csv.str());
        }
        if (!tr.plot.empty()) {
          std::vector<Series> series;
          for (std::size_t l = 0; l < rec.checkpoints.front().layers.size(); ++l) {
            Series ser{"layer " + std::to_string(l), {}};
            for (const auto& cp : rec.checkpoints) {
              if (cp.layers[l].ei) {
                ser.points.emplace_back(static_cast<double>(cp.epoch), *cp.layers[l].ei);
              }
            }
            series.push_back(std::move(ser));
          }
          emit_line_plot(series, {"EI during training", "epoch", "EI (bits)"},
                         run_path(tr.plot, s, several));
        }
        if (!tr.weights_out.empty()) {
          save_weights(rec.network_at(rec.checkpoints.size() - 1),
                       run_path(tr.weights_out, s, several));
        }
        const auto& last = rec.checkpoints.back();
        err << "train: seed " << s << " final train loss " << last.train_loss << ", test accuracy "
            << last.test_accuracy << '\n';
      }
    }});
  }

  // measure
  struct {
    std::string weights;
    std::optional<std::size_t> layer;
    MeasureFlags m{10'000'000, 8, 0, 0};
    Sink sink;
  } me;
  {
    auto* c = app.add_subcommand("measure", "measure every layer of a saved network");
    c->add_option("--weights", me.weights, "weight file")->required();
    c->add_option("--layer", me.layer, "only this layer transition");
    me.m.add(c);
    me.sink.add(c, "CSV");
    verbs.push_back({c, [&] {
      me.sink.require("measure");
      const Network net = load_weights(me.weights);
      if (me.layer && *me.layer >= net.depth()) {
        throw ConfigError("--layer " + std::to_string(*me.layer) + " out of range for a " +
                          std::to_string(net.depth()) + "-layer network");
      }
      std::vector<EIResult> results;
      for (std::size_t k = 0; k < net.depth(); ++k) {
        if (!me.layer || *me.layer == k) {
          err << "measure: layer " << k << '\n';
          results.push_back(measure_all(slice_of(net, k), me.m.config()));
        }
      }
      std::ostringstream csv;
      write_ei_csv(csv, results, me.layer.value_or(0));
      me.sink.write(csv.str(), out);
    }});
  }

  // plane
  struct {
    std::string run;
    std::string csv;
    Sink sink;
  } pl;
  {
    auto* c = app.add_subcommand("plane", "causal-plane trajectories of a training run");
    c->add_option("--run", pl.run, "run record (JSONL)")->required();
    c->add_option("--csv", pl.csv, "CSV of the plotted points");
    pl.sink.add(c, "SVG");
    verbs.push_back({c, [&] {
      pl.sink.require("plane");
      const RunRecord rec = load_run_jsonl(pl.run);
      std::vector<std::string> warnings;
      const auto points = causal_plane_series(rec, &warnings);
      for (const auto& w : warnings) {
        err << "plane: warning: " << w << '\n';
      }
      pl.sink.write(trajectory_svg(points, {"Causal plane", "degeneracy (bits)",
                                            "sensitivity (bits)"}),
                    out);
      if (!pl.csv.empty()) {
        std::ostringstream csv;
        csv << schema_comment("causal-plane") << "\nlayer,epoch,degeneracy,sensitivity\n";
        for (const auto& p : points) {
          csv << p.layer_index << ',' << p.epoch << ',' << format_double(p.x) << ','
              << format_double(p.y) << '\n';
        }
        write_text_file(pl.csv, csv.str());
      }
    }});
  }

  // converge
  struct {
    std::string weights;
    std::size_t layer = 0;
    std::size_t inputs = 6, outputs = 6;
    std::string activation = "sigmoid";
    double init_scale = 1.0;
    std::uint64_t init_seed = 1;
    std::string quantity = "ei";
    ConvergencePolicy policy;
    MeasureFlags m{0, 8, 1, 0};
    std::string fit;
    Sink sink;
  } cv;
  {
    auto* c = app.add_subcommand("converge", "sample-doubling convergence and extrapolation");
    c->add_option("--weights", cv.weights, "weight file (default: a random fan-in layer)");
    c->add_option("--layer", cv.layer, "layer transition of --weights")->capture_default_str();
    c->add_option("--inputs", cv.inputs, "random layer input width")
        ->check(CLI::Range(std::size_t{1}, std::size_t{1024}))
        ->capture_default_str();
    c->add_option("--outputs", cv.outputs, "random layer output width")
        ->check(CLI::Range(std::size_t{1}, std::size_t{1024}))
        ->capture_default_str();
    c->add_option("--activation", cv.activation, "random layer activation")->capture_default_str();
    c->add_option("--init-scale", cv.init_scale)->check(CLI::PositiveNumber)->capture_default_str();
    c->add_option("--init-seed", cv.init_seed)->capture_default_str();
    c->add_option("--quantity", cv.quantity, "ei or ei-parts")
        ->check(CLI::IsMember({"ei", "ei-parts"}))
        ->capture_default_str();
    c->add_option("--start", cv.policy.start_samples)->check(CLI::PositiveNumber)->capture_default_str();
    c->add_option("--max", cv.policy.max_samples)->check(CLI::PositiveNumber)->capture_default_str();
    c->add_option("--threshold", cv.policy.rel_threshold)->capture_default_str();
    c->add_option("--bins", cv.m.bins)->check(CLI::Range(std::size_t{2}, std::size_t{1} << 16))
        ->capture_default_str();
    c->add_option("--seed", cv.m.seed, "perturbation seed")->capture_default_str();
    cv.m.add_threads(c);
    c->add_option("--fit", cv.fit,
                  "also fit EI_parts over 100K..2M samples and write the fit CSV here");
    cv.sink.add(c, "trace CSV");
    verbs.push_back({c, [&] {
      cv.sink.require("converge");
      try {
        cv.policy.validate(cv.m.bins);
      } catch (const ConfigError& e) {
        throw ConfigError(std::string("--start/--max/--threshold: ") + e.what());
      }
      LayerSlice slice;
      if (!cv.weights.empty()) {
        const Network net = load_weights(cv.weights);
        if (cv.layer >= net.depth()) {
          throw ConfigError("--layer " + std::to_string(cv.layer) + " out of range");
        }
        slice = slice_of(net, cv.layer);
      } else {
        const Activation a = activation_flag(cv.activation, "--activation");
        slice = make_slice(init_uniform_fan_in(cv.outputs, cv.inputs, cv.init_scale, cv.init_seed),
                           a);
      }
      PerturbationConfig cfg = cv.m.config();
      cfg.samples = cv.policy.start_samples;
      const bool joint = cv.quantity == "ei";
      StreamingProbe probe(slice, cfg, {.joint = joint, .parts = !joint});
      auto measure = [&](std::uint64_t s) {
        probe.extend_to(s);
        const double v = joint ? probe.ei() : probe.ei_parts();
        err << "converge: " << s << " samples -> " << v << '\n';
        return v;
      };
      const auto res = doubling_until_converged(measure, cv.policy);
      std::ostringstream csv;
      write_trace_csv(csv, res.trace);
      cv.sink.write(csv.str(), out);
      err << "converge: " << (res.converged ? "converged" : "not converged") << " at "
          << res.samples_used << " samples, value " << res.value << '\n';
      if (!cv.fit.empty()) {
        StreamingProbe parts(slice, cfg, {.joint = false, .parts = true});
        std::vector<TracePoint> pts;
        for (auto s : extrapolation_schedule()) {
          parts.extend_to(s);
          pts.push_back({s, parts.ei_parts()});
        }
        const auto f = fit_extrapolation(pts);
        std::ostringstream fcsv;
        fcsv << schema_comment("extrapolation-fit") << "\nA,alpha,C,residual,at_1e15\n"
             << format_double(f.A) << ',' << format_double(f.alpha) << ',' << format_double(f.C)
             << ',' << format_double(f.residual) << ',' << format_double(extrapolate(f, 1e15))
             << '\n';
        write_text_file(cv.fit, fcsv.str());
      }
    }});
  }

  // report
  struct {
    std::vector<std::string> runs;
    std::string text;
    Sink sink;
  } rp;
  {
    auto* c = app.add_subcommand("report", "summary table over run records");
    c->add_option("runs", rp.runs, "run record files (JSONL)")->required();
    c->add_option("--text", rp.text, "plain-text summary path");
    rp.sink.add(c, "summary CSV");
    verbs.push_back({c, [&] {
      rp.sink.require("report");
      std::vector<RunRecord> records;
      for (const auto& f : rp.runs) {
        records.push_back(load_run_jsonl(f));
      }
      const Report rep = build_report(records);
      std::ostringstream csv, text;
      write_report_csv(csv, rep);
      write_report_text(text, rep);
      rp.sink.write(csv.str(), out);
      if (!rp.text.empty()) {
        write_text_file(rp.text, text.str());
      }
      err << text.str();
    }});
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "eiprobe: " << e.what() << "\n\n";
    const auto sub = app.get_subcommands();
    err << (sub.empty() ? app.help() : sub.front()->help());
    return kExitUsage;
  }

  for (const auto& v : verbs) {
    if (!v.app->parsed()) {
      continue;
    }
    const std::string verb = v.app->get_name();
    try {
      v.run();
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err << "eiprobe " << verb << ": " << e.what() << "\n\n" << v.app->help();
      return kExitUsage;
    } catch (const ConfigError& e) {
      err << "eiprobe " << verb << ": " << e.what() << '\n';
      return kExitUsage;
    } catch (const std::exception& e) {
      err << "eiprobe " << verb << ": error: " << e.what() << '\n';
      return kExitData;
    }
  }
  return kExitUsage;
}

} // namespace eiprobe
