#include "ccsim/engine.hpp"

#include <queue>

namespace ccsim {

SimulatedBackend::SimulatedBackend(const CostModel& cost, ExecMode mode, std::uint64_t seed)
    : cost_(cost), mode_(mode), load_rng_(seed, "backend.load"), unload_rng_(seed, "backend.unload") {}

TimeSpan SimulatedBackend::load(const std::string& model, ExecMode mode) {
  return sample_load(cost_.at(model).load(mode), load_rng_);
}

TimeSpan SimulatedBackend::unload(const std::string& model) {
  return sample_unload(cost_.at(model).load(mode_), unload_rng_);
}

TimeSpan SimulatedBackend::infer(const std::string& model, int batch_size) {
  return processing_time(cost_.at(model).curve, batch_size);
}

std::string_view to_string(IntervalKind kind) {
  switch (kind) {
    case IntervalKind::Load: return "load";
    case IntervalKind::Unload: return "unload";
    case IntervalKind::Infer: return "infer";
    case IntervalKind::Idle: return "idle";
  }
  return "?";
}

TimeSpan Timeline::total(IntervalKind kind) const {
  TimeSpan sum;
  for (const auto& i : intervals) {
    if (i.kind == kind) sum += i.length();
  }
  return sum;
}

void Timeline::check_partition() const {
  TimePoint cursor;
  for (const auto& i : intervals) {
    check_invariant(i.start == cursor, "timeline intervals overlap or leave a gap");
    check_invariant(i.end >= i.start, "timeline interval ends before it starts");
    cursor = i.end;
  }
}

namespace {

enum class EventKind { Arrival, TimerFire, RunEnd, UnloadDone, LoadDone, BatchDone };

struct Event {
  TimePoint time;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::Arrival;
  std::uint64_t payload = 0;  // request id or batch index
};

struct EventOrder {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  }
};

enum class GpuPhase { Idle, Loading, Ready, Inferring, Unloading };

class Simulation {
 public:
  Simulation(const CostModel& cost, const RunConfigCore& config, Backend& backend,
             const ArrivalTrace& trace)
      : cost_(cost),
        config_(config),
        backend_(backend),
        trace_(trace),
        ctx_{cost, config.strategy, config.sla, config.mode},
        state_(cost.model_names(), config.strategy.rate_window, config.strategy.default_rate_rps) {}

  RunResult run() {
    result_.run_length = config_.run_length;
    result_.requests.reserve(trace_.size());
    for (std::size_t i = 0; i < trace_.size(); ++i) {
      const auto& a = trace_.arrivals[i];
      if (!cost_.contains(a.model)) {
        throw ConfigError("trace arrival " + std::to_string(i) + " targets unknown model '" +
                          a.model + "'");
      }
      Request r;
      r.id = i;
      r.model = a.model;
      r.arrival = a.arrival;
      result_.requests.push_back(std::move(r));
      push(a.arrival, EventKind::Arrival, i);
    }
    queued_.assign(trace_.size(), false);
    if (config_.strategy.drain_at_end) {
      push(TimePoint{} + config_.run_length, EventKind::RunEnd, 0);
    }

    while (!events_.empty()) {
      const Event ev = events_.top();
      events_.pop();
      check_invariant(ev.time >= now_, "event time went backwards");
      now_ = ev.time;
      handle(ev);
    }
    finish_timeline();
    return std::move(result_);
  }

 private:
  void push(TimePoint at, EventKind kind, std::uint64_t payload) {
    events_.push(Event{at, next_seq_++, kind, payload});
  }

  bool gpu_free() const { return phase_ == GpuPhase::Idle || phase_ == GpuPhase::Ready; }

  void handle(const Event& ev) {
    switch (ev.kind) {
      case EventKind::Arrival: on_arrival(ev.payload); break;
      case EventKind::TimerFire:
        if (queued_[ev.payload] && gpu_free()) try_dispatch();
        break;
      case EventKind::RunEnd:
        if (gpu_free()) try_dispatch();
        break;
      case EventKind::UnloadDone: on_unload_done(); break;
      case EventKind::LoadDone: on_load_done(); break;
      case EventKind::BatchDone: on_batch_done(ev.payload); break;
    }
  }

  void on_arrival(RequestId id) {
    const auto& request = result_.requests[id];
    enqueue(state_, request);
    queued_[id] = true;
    if (config_.strategy.uses_timer()) {
      const auto deadline = ctx_.deadline(request.model, request.arrival);
      if (deadline.clamped) ++result_.clamped_deadlines;
      push(deadline.deadline, EventKind::TimerFire, id);
    }
    if (gpu_free()) try_dispatch();
  }

  void try_dispatch() {
    const TimePoint cutoff = TimePoint{} + config_.run_length;
    const bool past_end = now_ >= cutoff;
    if (past_end && !config_.strategy.drain_at_end) return;

    const Decision decision = decide(state_, ctx_, now_, past_end);
    if (!decision.is_dispatch()) return;

    Batch batch;
    batch.id = result_.batches.size();
    batch.model = decision.model;
    batch.decided_at = now_;
    for (const auto& q : take_front(state_, decision.model, decision.count)) {
      queued_[q.id] = false;
      batch.members.push_back(q.id);
    }
    result_.batches.push_back(std::move(batch));
    pending_batch_ = result_.batches.size() - 1;

    if (decision.kind == Decision::Kind::Dispatch) {
      check_invariant(phase_ == GpuPhase::Ready && resident_ == decision.model,
                      "dispatch without the model resident");
      start_inference();
      return;
    }

    ++result_.swap_count;
    result_.batches[pending_batch_].swap_incurred = true;
    const std::string previous = resident_;
    state_.loaded = decision.model;
    resident_ = decision.model;
    if (phase_ == GpuPhase::Ready) {
      const TimeSpan d = backend_.unload(previous);
      result_.batches[pending_batch_].unload_time = d;
      phase_ = GpuPhase::Unloading;
      record(IntervalKind::Unload, previous, d);
      push(now_ + d, EventKind::UnloadDone, 0);
    } else {
      start_loading();
    }
  }

  void start_loading() {
    const TimeSpan d = backend_.load(resident_, config_.mode);
    check_invariant(d > TimeSpan{}, "backend returned a non-positive load time");
    result_.batches[pending_batch_].load_time = d;
    phase_ = GpuPhase::Loading;
    record(IntervalKind::Load, resident_, d);
    push(now_ + d, EventKind::LoadDone, 0);
  }

  void start_inference() {
    auto& batch = result_.batches[pending_batch_];
    const TimeSpan d = backend_.infer(batch.model, batch.size());
    check_invariant(d > TimeSpan{}, "backend returned a non-positive inference time");
    batch.start = now_;
    batch.end = now_ + d;
    for (RequestId id : batch.members) result_.requests[id].dispatch = now_;
    phase_ = GpuPhase::Inferring;
    record(IntervalKind::Infer, batch.model, d);
    push(batch.end, EventKind::BatchDone, batch.id);
  }

  void on_unload_done() {
    check_invariant(phase_ == GpuPhase::Unloading, "unload completion while not unloading");
    start_loading();
  }

  void on_load_done() {
    check_invariant(phase_ == GpuPhase::Loading, "load completion while not loading");
    start_inference();
  }

  void on_batch_done(BatchId id) {
    check_invariant(phase_ == GpuPhase::Inferring, "batch completion while not inferring");
    const auto& batch = result_.batches[id];
    for (RequestId rid : batch.members) {
      auto& r = result_.requests[rid];
      r.completion = now_;
      r.batch_id = batch.id;
    }
    phase_ = GpuPhase::Ready;
    try_dispatch();
  }

  void record(IntervalKind kind, const std::string& model, TimeSpan d) {
    auto& intervals = result_.timeline.intervals;
    const TimePoint last = intervals.empty() ? TimePoint{} : intervals.back().end;
    check_invariant(now_ >= last, "GPU activity overlaps the previous interval");
    if (now_ > last) intervals.push_back({last, now_, IntervalKind::Idle, {}});
    intervals.push_back({now_, now_ + d, kind, model});
  }

  void finish_timeline() {
    auto& intervals = result_.timeline.intervals;
    const TimePoint last = intervals.empty() ? TimePoint{} : intervals.back().end;
    const TimePoint end = max(last, TimePoint{} + config_.run_length);
    if (end > last || intervals.empty()) intervals.push_back({last, end, IntervalKind::Idle, {}});
    result_.timeline.check_partition();
  }

  const CostModel& cost_;
  const RunConfigCore& config_;
  Backend& backend_;
  const ArrivalTrace& trace_;
  SchedulingContext ctx_;
  QueueState state_;
  RunResult result_;
  std::priority_queue<Event, std::vector<Event>, EventOrder> events_;
  std::uint64_t next_seq_ = 0;
  TimePoint now_;
  std::vector<bool> queued_;
  GpuPhase phase_ = GpuPhase::Idle;
  std::string resident_;
  std::size_t pending_batch_ = 0;
};

}  // namespace

Engine::Engine(const CostModel& cost, RunConfigCore config, Backend& backend)
    : cost_(cost), config_(std::move(config)), backend_(backend) {
  config_.strategy.validate();
  if (config_.run_length <= TimeSpan{}) throw ParameterError("run_length must be positive");
}

RunResult Engine::run(const ArrivalTrace& trace) {
  return Simulation(cost_, config_, backend_, trace).run();
}

RunResult run(const ArrivalTrace& trace, const CostModel& cost, const RunConfigCore& config) {
  SimulatedBackend backend(cost, config.mode, config.seed);
  return Engine(cost, config, backend).run(trace);
}

}  // namespace ccsim
