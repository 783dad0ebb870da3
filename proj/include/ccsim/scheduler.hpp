#pragma once

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ccsim/domain.hpp"
#include "ccsim/profiles.hpp"
#include "ccsim/time.hpp"

namespace ccsim {

enum class StrategyKind { BestBatch, BestBatchTimer, SelectBatchTimer, BestBatchPartialTimer };

std::string_view to_string(StrategyKind kind);
/// Accepts the config spellings: best_batch, best_batch_timer, select_batch_timer,
/// best_batch_partial_timer.
StrategyKind parse_strategy_kind(std::string_view text);

struct Strategy {
  StrategyKind kind = StrategyKind::BestBatch;
  TimeSpan timer_margin = TimeSpan::whole_seconds(1);
  TimeSpan rate_window = TimeSpan::whole_seconds(60);
  double default_rate_rps = 1.0;
  bool drain_at_end = false;

  bool uses_timer() const { return kind != StrategyKind::BestBatch; }
  void validate() const;
};

/// Sliding-window arrival-rate estimator, one window per model.
class RateEstimator {
 public:
  RateEstimator() = default;
  RateEstimator(TimeSpan window, double default_rate);

  /// Arrivals must be recorded in non-decreasing time order per model.
  void record(const std::string& model, TimePoint arrival);
  /// (N-1)/(t_last - t_first) over arrivals in (now - window, now]; the
  /// default rate when fewer than two arrivals or a zero span.
  double estimate(const std::string& model, TimePoint now) const;

  TimeSpan window() const { return window_; }
  double default_rate() const { return default_rate_; }

 private:
  TimeSpan window_ = TimeSpan::whole_seconds(60);
  double default_rate_ = 1.0;
  std::map<std::string, std::deque<TimePoint>> arrivals_;
};

struct QueuedRequest {
  RequestId id = 0;
  TimePoint arrival;
};

/// One FIFO queue per model plus the model currently resident on the GPU.
struct QueueState {
  std::map<std::string, std::deque<QueuedRequest>> queues;
  std::optional<std::string> loaded;
  RateEstimator rates;

  QueueState() = default;
  QueueState(const std::vector<std::string>& models, TimeSpan rate_window, double default_rate);

  std::size_t queued(const std::string& model) const;
  std::size_t total_queued() const;
  bool contains(RequestId id) const;
};

/// Appends to the request's model queue and feeds the rate estimator.
/// Throws ConfigError for a model without a queue.
void enqueue(QueueState& state, const Request& request);

/// Removes the `count` oldest requests of `model`.
std::vector<QueuedRequest> take_front(QueueState& state, const std::string& model, int count);

struct Decision {
  enum class Kind { Dispatch, SwapThenDispatch, Wait };

  Kind kind = Kind::Wait;
  std::string model;
  int count = 0;
  std::optional<TimePoint> wait_until;

  static Decision wait(std::optional<TimePoint> until = std::nullopt) {
    return {Kind::Wait, {}, 0, until};
  }
  bool is_dispatch() const { return kind != Kind::Wait; }
  friend bool operator==(const Decision&, const Decision&) = default;
};

struct DeadlineResult {
  TimePoint deadline;
  bool clamped = false;
};

/// arrival + sla - est_load - est_proc - margin, clamped to the arrival when
/// the estimates leave no slack (clamped = true).
DeadlineResult timer_deadline(TimePoint arrival, const SlaPolicy& sla, TimeSpan est_load,
                              TimeSpan est_proc, TimeSpan margin);

double estimate_rate(const RateEstimator& estimator, const std::string& model, TimePoint now);

/// clamp(floor(rate * max(0, sla - est_load - est_proc)), 1, max_batch).
int select_batch_size(double rate, const SlaPolicy& sla, TimeSpan est_load, TimeSpan est_proc,
                      int max_batch);

/// Everything decide() reads besides the queue state.
struct SchedulingContext {
  const CostModel& cost;
  Strategy strategy;
  SlaPolicy sla;
  ExecMode mode;

  /// Mode-specific mean load time of the model.
  TimeSpan est_load(const std::string& model) const;
  /// Processing time of one OBS-sized batch.
  TimeSpan est_proc(const std::string& model) const;
  DeadlineResult deadline(const std::string& model, TimePoint arrival) const;
  /// Batch size the strategy aims for (OBS, or the Select Batch size).
  int target_batch(const QueueState& state, const std::string& model, TimePoint now) const;
};

/// Earliest head arrival first; ties by longer queue, then smaller name.
/// `eligible` must be non-empty and name non-empty queues.
std::string pick_next_model(const QueueState& state, const std::vector<std::string>& eligible);

/// Scheduling decision for a GPU that is idle or just became ready. With
/// `draining` set, every non-empty queue is eligible (run-end drain).
Decision decide(const QueueState& state, const SchedulingContext& ctx, TimePoint now,
                bool draining = false);

}  // namespace ccsim
