#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ccsim/engine.hpp"
#include "ccsim/metrics.hpp"
#include "ccsim/profiles.hpp"
#include "ccsim/scheduler.hpp"
#include "ccsim/traffic.hpp"

namespace ccsim {

/// Everything needed to reproduce one experiment cell.
struct RunConfig {
  std::filesystem::path cost_model;
  Strategy strategy;
  TrafficSpec traffic;
  /// Empty mix in the file means "uniform over the cost model's models".
  bool uniform_model_mix = true;
  double sla_s = 60.0;
  ExecMode mode = ExecMode::NoCC;
  std::uint64_t seed = 1;
  TimeSpan run_length = TimeSpan::whole_seconds(1200);
  /// Replays this arrival CSV instead of generating traffic.
  std::optional<std::filesystem::path> trace;

  CellKey cell_key() const;
};

/// Parses a run config document. Relative paths resolve against `base_dir`.
/// Errors are ConfigError whose message starts with the offending key.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);
/// Inverse of parse_run_config (absolute paths).
nlohmann::json to_json(const RunConfig& config);

/// Seed shared by every cell with the same traffic (pattern, mean, seed), so
/// strategy, SLA and mode comparisons see identical arrivals and load draws.
std::uint64_t cell_seed(const RunConfig& config);

struct CellOutput {
  std::vector<RequestRecord> requests;
  std::vector<BatchRecord> batches;
  RunResult run;
  RunSummary summary;
};

/// Generates (or reads) the trace and simulates one cell.
CellOutput run_cell(const RunConfig& config, const CostModel& cost);
/// run_cell plus the four CSVs and an echoed config.json in out_dir.
RunSummary run_cell_to_dir(const RunConfig& config, const CostModel& cost,
                           const std::filesystem::path& out_dir);

struct SweepSpec {
  RunConfig base;
  std::vector<StrategyKind> strategies;
  std::vector<TrafficPattern> patterns;
  std::vector<double> means;
  std::vector<double> slas;
  std::vector<ExecMode> modes;
  std::vector<std::uint64_t> seeds;

  std::vector<RunConfig> cells() const;
};

SweepSpec parse_sweep_spec(const nlohmann::json& doc, const std::filesystem::path& base_dir);
SweepSpec load_sweep_spec(const std::filesystem::path& path);
/// 4 strategies x 3 patterns x means {2,4,8} x SLAs {40,60,80} x both modes x seeds 1..5.
SweepSpec default_sweep(const std::filesystem::path& cost_model);

/// Sub-directory name of a cell, e.g. "best_batch_timer-gamma-m4-sla60-cc-s1".
std::string cell_dir_name(const RunConfig& config);
bool cell_key_less(const CellKey& a, const CellKey& b);

struct SweepCellStatus {
  std::string cell;
  bool ok = false;
  std::string message;
};

struct SweepResult {
  std::vector<RunSummary> summaries;  // sorted by cell key
  std::vector<SweepCellStatus> statuses;
  bool all_ok() const;
};

/// Runs every cell (up to `jobs` at once), writes per-cell outputs,
/// sweep_summary.csv and sweep_status.csv under out_dir.
SweepResult run_sweep(const SweepSpec& spec, const std::filesystem::path& out_dir, int jobs);

struct ObsRow {
  std::string model;
  int obs = 1;
  double peak_rps = 0.0;
  int max_batch = 0;
};
std::vector<ObsRow> obs_table(const CostModel& cost);
void print_obs_table(const std::vector<ObsRow>& rows, std::ostream& out);

struct ComparisonRow {
  CellKey cell;  // mode field cleared
  double mean_latency_cc_s = 0.0;
  double mean_latency_nocc_s = 0.0;
  double latency_gap_pct = 0.0;
  double attainment_gap_pp = 0.0;
  double throughput_gap_pct = 0.0;
  double util_gap_pct = 0.0;
};

/// (cc - nocc) / cc * 100, 0 when both are 0.
double latency_gap_pct(double cc, double nocc);
/// (nocc - cc) / cc * 100, 0 when both are 0.
double relative_gain_pct(double cc, double nocc);

/// Pairs CC and No-CC cells from two run or sweep directories (the same
/// directory may be passed twice). Throws ConfigError on unmatched cells.
std::vector<ComparisonRow> compare_dirs(const std::filesystem::path& dir_cc,
                                        const std::filesystem::path& dir_nocc);
void write_comparison_csv(const std::vector<ComparisonRow>& rows, std::ostream& out);

}  // namespace ccsim
