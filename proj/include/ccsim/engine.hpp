#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ccsim/domain.hpp"
#include "ccsim/profiles.hpp"
#include "ccsim/random.hpp"
#include "ccsim/scheduler.hpp"
#include "ccsim/traffic.hpp"

namespace ccsim {

/// Source of operation durations. The engine never looks behind these numbers.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual TimeSpan load(const std::string& model, ExecMode mode) = 0;
  virtual TimeSpan unload(const std::string& model) = 0;
  virtual TimeSpan infer(const std::string& model, int batch_size) = 0;
};

/// Durations drawn from a CostModel: sampled load/unload, curve-based inference.
class SimulatedBackend final : public Backend {
 public:
  SimulatedBackend(const CostModel& cost, ExecMode mode, std::uint64_t seed);

  TimeSpan load(const std::string& model, ExecMode mode) override;
  TimeSpan unload(const std::string& model) override;
  /// Throws OomBoundaryError past the profiled maximum.
  TimeSpan infer(const std::string& model, int batch_size) override;

 private:
  const CostModel& cost_;
  ExecMode mode_;
  Rng load_rng_;
  Rng unload_rng_;
};

enum class IntervalKind { Load, Unload, Infer, Idle };
std::string_view to_string(IntervalKind kind);

struct Interval {
  TimePoint start;
  TimePoint end;
  IntervalKind kind = IntervalKind::Idle;
  std::string model;

  TimeSpan length() const { return end - start; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Contiguous, non-overlapping partition of [0, end] into GPU activity intervals.
struct Timeline {
  std::vector<Interval> intervals;

  TimeSpan total(IntervalKind kind) const;
  TimePoint end() const { return intervals.empty() ? TimePoint{} : intervals.back().end; }
  /// Throws InvariantViolation unless the intervals tile [0, end()] exactly.
  void check_partition() const;
};

struct Batch {
  BatchId id = 0;
  std::string model;
  std::vector<RequestId> members;
  bool swap_incurred = false;
  TimeSpan unload_time;
  TimeSpan load_time;
  TimePoint decided_at;
  TimePoint start;  // inference start
  TimePoint end;

  int size() const { return static_cast<int>(members.size()); }
  TimeSpan processing() const { return end - start; }
};

struct RunConfigCore {
  Strategy strategy;
  SlaPolicy sla = SlaPolicy::seconds(60);
  ExecMode mode = ExecMode::NoCC;
  std::uint64_t seed = 0;
  TimeSpan run_length = TimeSpan::whole_seconds(1200);
};

struct RunResult {
  std::vector<Request> requests;  // indexed by RequestId
  std::vector<Batch> batches;     // in dispatch order
  Timeline timeline;
  int swap_count = 0;
  TimeSpan run_length;
  /// Requests whose timer deadline was clamped to their arrival.
  std::size_t clamped_deadlines = 0;

  TimePoint run_end() const { return timeline.end(); }
};

/// Single-GPU discrete-event simulation of one experiment cell.
class Engine {
 public:
  Engine(const CostModel& cost, RunConfigCore config, Backend& backend);

  RunResult run(const ArrivalTrace& trace);

 private:
  const CostModel& cost_;
  RunConfigCore config_;
  Backend& backend_;
};

/// Convenience wrapper: SimulatedBackend seeded from `config.seed`.
RunResult run(const ArrivalTrace& trace, const CostModel& cost, const RunConfigCore& config);

}  // namespace ccsim
