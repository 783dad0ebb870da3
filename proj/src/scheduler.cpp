#include "ccsim/scheduler.hpp"

#include <algorithm>
#include <cmath>

namespace ccsim {

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::BestBatch: return "best_batch";
    case StrategyKind::BestBatchTimer: return "best_batch_timer";
    case StrategyKind::SelectBatchTimer: return "select_batch_timer";
    case StrategyKind::BestBatchPartialTimer: return "best_batch_partial_timer";
  }
  return "?";
}

StrategyKind parse_strategy_kind(std::string_view text) {
  for (auto kind : {StrategyKind::BestBatch, StrategyKind::BestBatchTimer,
                    StrategyKind::SelectBatchTimer, StrategyKind::BestBatchPartialTimer}) {
    if (text == to_string(kind)) return kind;
  }
  throw ParameterError("unknown strategy '" + std::string(text) + "'");
}

void Strategy::validate() const {
  if (timer_margin < TimeSpan{}) throw ParameterError("timer_margin_s must not be negative");
  if (rate_window <= TimeSpan{}) throw ParameterError("rate_window_s must be positive");
  if (!(default_rate_rps >= 0.0)) throw ParameterError("default_rate_rps must not be negative");
}

RateEstimator::RateEstimator(TimeSpan window, double default_rate)
    : window_(window), default_rate_(default_rate) {}

void RateEstimator::record(const std::string& model, TimePoint arrival) {
  auto& times = arrivals_[model];
  times.push_back(arrival);
  // Queries happen at or after the latest arrival, so anything at or before
  // arrival - window can never be inside a query window again.
  while (!times.empty() && times.front() <= arrival - window_) times.pop_front();
}

double RateEstimator::estimate(const std::string& model, TimePoint now) const {
  auto it = arrivals_.find(model);
  if (it == arrivals_.end()) return default_rate_;
  const auto& times = it->second;
  auto first = std::upper_bound(times.begin(), times.end(), now - window_);
  auto last = std::upper_bound(first, times.end(), now);
  const auto n = std::distance(first, last);
  if (n < 2) return default_rate_;
  const TimeSpan span = *std::prev(last) - *first;
  if (span <= TimeSpan{}) return default_rate_;
  return static_cast<double>(n - 1) / span.to_seconds();
}

QueueState::QueueState(const std::vector<std::string>& models, TimeSpan rate_window,
                       double default_rate)
    : rates(rate_window, default_rate) {
  for (const auto& m : models) queues[m];
}

std::size_t QueueState::queued(const std::string& model) const {
  auto it = queues.find(model);
  return it == queues.end() ? 0 : it->second.size();
}

std::size_t QueueState::total_queued() const {
  std::size_t n = 0;
  for (const auto& [_, q] : queues) n += q.size();
  return n;
}

bool QueueState::contains(RequestId id) const {
  for (const auto& [_, q] : queues) {
    for (const auto& r : q) {
      if (r.id == id) return true;
    }
  }
  return false;
}

void enqueue(QueueState& state, const Request& request) {
  auto it = state.queues.find(request.model);
  if (it == state.queues.end()) {
    throw ConfigError("request " + std::to_string(request.id) + " targets unknown model '" +
                      request.model + "'");
  }
  it->second.push_back({request.id, request.arrival});
  state.rates.record(request.model, request.arrival);
}

std::vector<QueuedRequest> take_front(QueueState& state, const std::string& model, int count) {
  auto& q = state.queues.at(model);
  check_invariant(count >= 1 && static_cast<std::size_t>(count) <= q.size(),
                  "dispatch count exceeds queue length");
  std::vector<QueuedRequest> taken(q.begin(), q.begin() + count);
  q.erase(q.begin(), q.begin() + count);
  return taken;
}

DeadlineResult timer_deadline(TimePoint arrival, const SlaPolicy& sla, TimeSpan est_load,
                              TimeSpan est_proc, TimeSpan margin) {
  const TimeSpan slack = sla.limit() - est_load - est_proc - margin;
  if (slack <= TimeSpan{}) return {arrival, true};
  return {arrival + slack, false};
}

double estimate_rate(const RateEstimator& estimator, const std::string& model, TimePoint now) {
  return estimator.estimate(model, now);
}

int select_batch_size(double rate, const SlaPolicy& sla, TimeSpan est_load, TimeSpan est_proc,
                      int max_batch) {
  const TimeSpan desired = max(TimeSpan{}, sla.limit() - est_load - est_proc);
  const double raw = std::floor(std::max(0.0, rate) * desired.to_seconds());
  if (!(raw >= 1.0)) return 1;
  if (raw >= static_cast<double>(max_batch)) return std::max(1, max_batch);
  return static_cast<int>(raw);
}

TimeSpan SchedulingContext::est_load(const std::string& model) const {
  return cost.at(model).load(mode).load_mean;
}

TimeSpan SchedulingContext::est_proc(const std::string& model) const {
  const auto& profile = cost.at(model);
  return processing_time(profile.curve, profile.obs);
}

DeadlineResult SchedulingContext::deadline(const std::string& model, TimePoint arrival) const {
  return timer_deadline(arrival, sla, est_load(model), est_proc(model), strategy.timer_margin);
}

int SchedulingContext::target_batch(const QueueState& state, const std::string& model,
                                    TimePoint now) const {
  const auto& profile = cost.at(model);
  if (strategy.kind != StrategyKind::SelectBatchTimer) return profile.obs;
  return select_batch_size(state.rates.estimate(model, now), sla, est_load(model), est_proc(model),
                           profile.curve.max_batch());
}

std::string pick_next_model(const QueueState& state, const std::vector<std::string>& eligible) {
  check_invariant(!eligible.empty(), "pick_next_model on an empty eligible set");
  const std::string* best = nullptr;
  for (const auto& model : eligible) {
    if (best == nullptr) {
      best = &model;
      continue;
    }
    const auto& a = state.queues.at(model);
    const auto& b = state.queues.at(*best);
    const auto ta = a.front().arrival;
    const auto tb = b.front().arrival;
    if (ta != tb) {
      if (ta < tb) best = &model;
    } else if (a.size() != b.size()) {
      if (a.size() > b.size()) best = &model;
    } else if (model < *best) {
      best = &model;
    }
  }
  return *best;
}

Decision decide(const QueueState& state, const SchedulingContext& ctx, TimePoint now,
                bool draining) {
  const bool timers = ctx.strategy.uses_timer();
  std::vector<std::string> eligible;
  std::map<std::string, int> counts;
  std::optional<TimePoint> next_deadline;

  for (const auto& [model, queue] : state.queues) {
    if (queue.empty()) continue;
    const int target = ctx.target_batch(state, model, now);
    const int available = static_cast<int>(queue.size());
    bool ok = draining || available >= target;
    if (timers) {
      const TimePoint deadline = ctx.deadline(model, queue.front().arrival).deadline;
      if (deadline <= now) {
        ok = true;
      } else if (!next_deadline || deadline < *next_deadline) {
        next_deadline = deadline;
      }
    }
    if (ok) {
      eligible.push_back(model);
      counts[model] = std::min(available, target);
    }
  }
  if (eligible.empty()) return Decision::wait(next_deadline);

  std::string chosen = pick_next_model(state, eligible);
  int count = counts.at(chosen);

  if (ctx.strategy.kind == StrategyKind::BestBatchPartialTimer && state.loaded &&
      *state.loaded != chosen && state.queued(*state.loaded) > 0) {
    chosen = *state.loaded;
    count = std::min(static_cast<int>(state.queued(chosen)), ctx.cost.at(chosen).obs);
  }

  check_invariant(count >= 1 && static_cast<std::size_t>(count) <= state.queued(chosen),
                  "decision count outside queue length");
  check_invariant(count <= ctx.cost.at(chosen).curve.max_batch(),
                  "decision count beyond the profiled maximum batch");
  const auto kind = state.loaded && *state.loaded == chosen ? Decision::Kind::Dispatch
                                                            : Decision::Kind::SwapThenDispatch;
  return {kind, chosen, count, std::nullopt};
}

}  // namespace ccsim
