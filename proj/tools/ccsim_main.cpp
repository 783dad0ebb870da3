// ccsim: command-line driver for the relaxed-batch inference simulator.
//
//   ccsim simulate    --config run.json [--seed N] [--out DIR] [--mode cc|nocc]
//   ccsim sweep       [--config sweep.json | --cost-model FILE] --out DIR [--jobs N]
//   ccsim gen-traffic --pattern gamma|bursty|ramp --mean R --duration S --seed N --out trace.csv
//   ccsim obs         FILE
//   ccsim compare     --cc DIR --nocc DIR [--out DIR]
//
// Exit codes: 0 ok, 2 configuration/parameter error, 3 runtime fault.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ccsim/csv.hpp"
#include "ccsim/harness.hpp"

namespace fs = std::filesystem;
using namespace ccsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int jobs = 1;
};

int cmd_simulate(const GlobalFlags& g, const std::string& mode, const std::string& trace) {
  if (g.config.empty()) throw ConfigError("config: --config is required for simulate");
  RunConfig config = load_run_config(g.config);
  if (g.seed) config.seed = *g.seed;
  if (!mode.empty()) config.mode = parse_exec_mode(mode);
  if (!trace.empty()) config.trace = fs::path(trace);
  const CostModel cost = load_cost_model(config.cost_model.string());
  const fs::path out = g.out.empty() ? fs::path("out") / cell_dir_name(config) : fs::path(g.out);
  const RunSummary summary = run_cell_to_dir(config, cost, out);
  write_summary_header(std::cout);
  write_summary_row(summary, std::cout);
  std::cerr << "wrote " << out.string() << '\n';
  return kExitOk;
}

int cmd_sweep(const GlobalFlags& g, const std::string& cost_model) {
  SweepSpec spec;
  if (!g.config.empty()) {
    spec = load_sweep_spec(g.config);
  } else if (!cost_model.empty()) {
    if (!fs::exists(cost_model)) throw ConfigError("cost_model: cannot read '" + cost_model + "'");
    spec = default_sweep(cost_model);
  } else {
    throw ConfigError("config: sweep needs --config or --cost-model");
  }
  if (g.seed) {
    // --seed replaces the seed list with a single base seed.
    spec.seeds = {*g.seed};
  }
  const fs::path out = g.out.empty() ? fs::path("sweep_out") : fs::path(g.out);
  const auto started = std::chrono::steady_clock::now();
  const SweepResult result = run_sweep(spec, out, g.jobs);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  std::size_t failed = 0;
  for (const auto& s : result.statuses) {
    if (!s.ok) {
      ++failed;
      std::cerr << "cell " << s.cell << " failed: " << s.message << '\n';
    }
  }
  std::cout << result.statuses.size() << " cells, " << failed << " failed, "
            << format_fixed(secs, 2) << " s; summary in " << (out / "sweep_summary.csv").string()
            << '\n';
  return failed == 0 ? kExitOk : kExitRuntime;
}

struct TrafficFlags {
  std::string pattern = "gamma";
  double mean = 4.0;
  double duration = 1200.0;
  double shape = 0.5;
  double period = 120.0;
  double duty = 0.25;
  double peak_fraction = 0.5;
  std::string models = "model";
  double bin_s = 100.0;
};

int cmd_gen_traffic(const GlobalFlags& g, const TrafficFlags& f) {
  TrafficSpec spec;
  spec.pattern = parse_traffic_pattern(f.pattern);
  spec.mean_rps = f.mean;
  spec.duration = TimeSpan::seconds(f.duration);
  spec.params.gamma_shape = f.shape;
  spec.params.burst_period = TimeSpan::seconds(f.period);
  spec.params.burst_duty = f.duty;
  spec.params.ramp_peak_fraction = f.peak_fraction;
  std::vector<std::string> models;
  std::stringstream ss(f.models);
  for (std::string m; std::getline(ss, m, ',');) {
    if (!m.empty()) models.push_back(m);
  }
  if (models.empty()) throw ParameterError("--models must name at least one model");
  spec.model_mix = uniform_mix(models);
  if (!(f.bin_s > 0.0)) throw ParameterError("--bin must be positive");

  const ArrivalTrace trace = generate_trace(spec, g.seed.value_or(1));
  if (g.out.empty() || g.out == "-") {
    write_trace_csv(trace, std::cout);
  } else {
    std::ofstream out(g.out, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("out: cannot write '" + g.out + "'");
    write_trace_csv(trace, out);
  }

  const auto bins = static_cast<std::size_t>(std::ceil(f.duration / f.bin_s));
  std::vector<std::size_t> counts(bins, 0);
  const TimeSpan bin = TimeSpan::seconds(f.bin_s);
  for (const auto& a : trace.arrivals) {
    counts[std::min(bins - 1, static_cast<std::size_t>(a.arrival.count() / bin.count()))]++;
  }
  std::cerr << "arrivals " << trace.size() << ", realized mean " << format_fixed(realized_mean(trace), 4)
            << " rps\nbin counts (" << f.bin_s << " s):";
  for (auto c : counts) std::cerr << ' ' << c;
  std::cerr << '\n';
  return kExitOk;
}

int cmd_obs(const GlobalFlags& g, const std::string& path) {
  const std::string file = !path.empty() ? path : g.config;
  if (file.empty()) throw ConfigError("cost_model: obs needs a cost-model file");
  print_obs_table(obs_table(load_cost_model(file)), std::cout);
  return kExitOk;
}

int cmd_compare(const GlobalFlags& g, const std::string& cc, const std::string& nocc) {
  const auto rows = compare_dirs(cc, nocc);
  const fs::path out_dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
  fs::create_directories(out_dir);
  const fs::path out = out_dir / "comparison.csv";
  std::ofstream file(out, std::ios::binary | std::ios::trunc);
  if (!file) throw ConfigError("out: cannot write '" + out.string() + "'");
  write_comparison_csv(rows, file);
  std::cout << rows.size() << " paired cells written to " << out.string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relaxed-batch multi-model inference simulator (CC vs No-CC)", "ccsim"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  app.add_option("--config", g.config, "Run or sweep configuration (JSON)");
  app.add_option("--seed", g.seed, "Seed override");
  app.add_option("--out", g.out, "Output directory (or file for gen-traffic)");
  app.add_option("--jobs", g.jobs, "Parallel sweep cells")->check(CLI::PositiveNumber);

  auto* simulate = app.add_subcommand("simulate", "Run one experiment cell");
  std::string mode, trace;
  simulate->add_option("--mode", mode, "cc or nocc (overrides the config)");
  simulate->add_option("--trace", trace, "Replay an arrival CSV instead of generating traffic");

  auto* sweep = app.add_subcommand("sweep", "Run every cell of an experiment grid");
  std::string sweep_cost_model;
  sweep->add_option("--cost-model", sweep_cost_model, "Run the default grid against this cost model");

  auto* gen = app.add_subcommand("gen-traffic", "Write a synthetic arrival trace");
  TrafficFlags tf;
  gen->add_option("--pattern", tf.pattern, "gamma, bursty or ramp");
  gen->add_option("--mean", tf.mean, "Mean requests per second");
  gen->add_option("--duration", tf.duration, "Trace length in seconds");
  gen->add_option("--shape", tf.shape, "Gamma shape");
  gen->add_option("--period", tf.period, "Burst period in seconds");
  gen->add_option("--duty", tf.duty, "Burst duty cycle in (0, 1]");
  gen->add_option("--peak-fraction", tf.peak_fraction, "Ramp peak position in (0, 1)");
  gen->add_option("--models", tf.models, "Comma-separated model names (uniform mix)");
  gen->add_option("--bin", tf.bin_s, "Histogram bin width in seconds");

  auto* obs = app.add_subcommand("obs", "Print per-model OBS and peak throughput");
  std::string obs_path;
  obs->add_option("cost_model", obs_path, "Cost-model JSON");

  auto* compare = app.add_subcommand("compare", "Per-cell CC vs No-CC gaps");
  std::string dir_cc, dir_nocc;
  compare->add_option("--cc", dir_cc, "Run or sweep directory holding CC cells")->required();
  compare->add_option("--nocc", dir_nocc, "Run or sweep directory holding No-CC cells")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(g, mode, trace);
    if (*sweep) return cmd_sweep(g, sweep_cost_model);
    if (*gen) return cmd_gen_traffic(g, tf);
    if (*obs) return cmd_obs(g, obs_path);
    if (*compare) return cmd_compare(g, dir_cc, dir_nocc);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime fault: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}
