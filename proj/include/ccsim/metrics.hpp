#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ccsim/domain.hpp"
#include "ccsim/engine.hpp"

namespace ccsim {

struct RequestRecord {
  RequestId request_id = 0;
  std::string model;
  TimePoint arrival;
  std::optional<TimePoint> dispatch;
  std::optional<TimePoint> completion;
  std::optional<BatchId> batch_id;
  int batch_size = 0;
  std::optional<TimeSpan> latency;
  bool sla_met = false;
  bool fulfilled = false;
};

struct BatchRecord {
  BatchId batch_id = 0;
  std::string model;
  int size = 0;
  bool swap_incurred = false;
  TimeSpan load;
  TimePoint start;
  TimePoint end;
  TimeSpan processing;

  double inference_throughput_rps() const { return size / processing.to_seconds(); }
};

/// Identifies the experiment cell a run belongs to.
struct CellKey {
  std::string strategy;
  std::string pattern;
  double mean_rps = 0.0;
  double sla_s = 0.0;
  std::string mode;
  std::uint64_t seed = 0;
};

struct RunSummary {
  CellKey cell;
  std::size_t total_requests = 0;
  std::size_t fulfilled = 0;
  double attainment_pct = 0.0;
  double overall_throughput_rps = 0.0;
  double inference_rate_rps = 0.0;
  double gpu_util_pct = 0.0;
  double load_pct = 0.0;
  double unload_pct = 0.0;
  double idle_pct = 0.0;
  int swap_count = 0;
  TimeSpan runtime;
  /// Attainment of an empty run is reported as 100% with this flag set.
  bool empty_run = false;
};

std::vector<RequestRecord> request_records(const RunResult& run, const SlaPolicy& sla);
std::vector<BatchRecord> batch_records(const RunResult& run);

struct Attainment {
  double pct = 100.0;
  bool no_requests = false;
};

/// 100 * (fulfilled with latency <= sla) / all requests, unfulfilled included.
Attainment attainment(const std::vector<RequestRecord>& records, const SlaPolicy& sla);

/// Fulfilled requests per second of runtime; throws ParameterError when runtime <= 0.
double overall_throughput(const std::vector<RequestRecord>& records, TimeSpan runtime);

/// Requests per second of pure inference time; 0 with no batches.
double inference_rate(const std::vector<BatchRecord>& batches);

/// Mean latency of fulfilled requests in seconds; nullopt when none completed.
std::optional<double> mean_latency_s(const std::vector<RequestRecord>& records);

struct GpuBreakdown {
  double infer_pct = 0.0;
  double load_pct = 0.0;
  double unload_pct = 0.0;
  double idle_pct = 100.0;
};

/// Shares of the timeline in percent, rounded to hundredths by largest
/// remainder so the four values always add up to exactly 100.00.
GpuBreakdown gpu_breakdown(const Timeline& timeline);

RunSummary summarize(const RunResult& run, const SlaPolicy& sla, CellKey cell);

// CSV schemas -----------------------------------------------------------------

extern const std::vector<std::string> kRequestColumns;
extern const std::vector<std::string> kBatchColumns;
extern const std::vector<std::string> kTimelineColumns;
extern const std::vector<std::string> kSummaryColumns;

void write_requests_csv(const std::vector<RequestRecord>& records, std::ostream& out);
void write_batches_csv(const std::vector<BatchRecord>& batches, std::ostream& out);
void write_timeline_csv(const Timeline& timeline, std::ostream& out);
void write_summary_header(std::ostream& out);
void write_summary_row(const RunSummary& summary, std::ostream& out);

/// Writes requests.csv, batches.csv, timeline.csv and summary.csv into out_dir
/// (created if missing). Throws ConfigError naming the path on I/O failure.
void write_outputs(const std::vector<RequestRecord>& records, const std::vector<BatchRecord>& batches,
                   const Timeline& timeline, const RunSummary& summary,
                   const std::filesystem::path& out_dir);

std::vector<RequestRecord> read_requests_csv(const std::filesystem::path& path);
std::vector<RunSummary> read_summary_csv(const std::filesystem::path& path);

}  // namespace ccsim
