#include <gtest/gtest.h>

#include <map>

#include "ccsim/engine.hpp"
#include "ccsim/metrics.hpp"
#include "fixtures.hpp"

using namespace ccsim;

namespace {

RunConfigCore config_for(StrategyKind kind, ExecMode mode = ExecMode::NoCC, double run_s = 30) {
  RunConfigCore c;
  c.strategy.kind = kind;
  c.mode = mode;
  c.seed = 1;
  c.run_length = TimeSpan::seconds(run_s);
  return c;
}

ArrivalTrace oracle_trace() {
  return fixtures::make_trace({{0, "A"}, {5, "A"}, {6, "B"}, {7, "B"}}, 30);
}

std::string csv_bytes(const RunResult& run, const SlaPolicy& sla) {
  std::ostringstream out;
  write_requests_csv(request_records(run, sla), out);
  write_batches_csv(batch_records(run), out);
  write_timeline_csv(run.timeline, out);
  return out.str();
}

class ScriptedBackend final : public Backend {
 public:
  TimeSpan load(const std::string&, ExecMode) override { ++loads; return TimeSpan::seconds(1); }
  TimeSpan unload(const std::string&) override { ++unloads; return TimeSpan::seconds(0.5); }
  TimeSpan infer(const std::string&, int size) override { return TimeSpan::seconds(size); }
  int loads = 0;
  int unloads = 0;
};

}  // namespace

TEST(Engine, HandComputedScenario) {
  const auto cost = fixtures::oracle_cost_model();
  const auto run = ccsim::run(oracle_trace(), cost, config_for(StrategyKind::BestBatch));
  ASSERT_EQ(run.requests.size(), 4u);
  const double expected[] = {21, 16, 31.01, 30.01};
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(*latency_of(run.requests[i]), TimeSpan::seconds(expected[i])) << "request " << i;
  }
  EXPECT_EQ(run.swap_count, 2);
  EXPECT_EQ(run.timeline.total(IntervalKind::Infer), TimeSpan::seconds(12));
  EXPECT_EQ(run.timeline.total(IntervalKind::Load), TimeSpan::seconds(20));
  EXPECT_EQ(run.timeline.total(IntervalKind::Unload), TimeSpan::seconds(0.01));
  const std::vector<Interval> timeline = {
      {TimePoint::seconds(0), TimePoint::seconds(5), IntervalKind::Idle, ""},
      {TimePoint::seconds(5), TimePoint::seconds(15), IntervalKind::Load, "A"},
      {TimePoint::seconds(15), TimePoint::seconds(21), IntervalKind::Infer, "A"},
      {TimePoint::seconds(21), TimePoint::seconds(21.01), IntervalKind::Unload, "A"},
      {TimePoint::seconds(21.01), TimePoint::seconds(31.01), IntervalKind::Load, "B"},
      {TimePoint::seconds(31.01), TimePoint::seconds(37.01), IntervalKind::Infer, "B"},
  };
  EXPECT_EQ(run.timeline.intervals, timeline);
  ASSERT_EQ(run.batches.size(), 2u);
  EXPECT_TRUE(run.batches[0].swap_incurred);
  EXPECT_EQ(run.batches[1].unload_time, TimeSpan::seconds(0.01));
}

TEST(Engine, EmptyTrace) {
  const auto cost = fixtures::oracle_cost_model();
  ArrivalTrace empty;
  empty.duration = TimeSpan::seconds(30);
  const auto run = ccsim::run(empty, cost, config_for(StrategyKind::BestBatchTimer));
  EXPECT_TRUE(run.batches.empty());
  EXPECT_EQ(run.swap_count, 0);
  ASSERT_EQ(run.timeline.intervals.size(), 1u);
  EXPECT_EQ(run.timeline.intervals[0].kind, IntervalKind::Idle);
  EXPECT_EQ(run.timeline.intervals[0].end, TimePoint::seconds(30));
}

TEST(Engine, UnknownModelInTrace) {
  const auto cost = fixtures::oracle_cost_model();
  EXPECT_THROW(ccsim::run(fixtures::make_trace({{1, "Z"}}), cost, config_for(StrategyKind::BestBatch)),
               ConfigError);
}

TEST(Engine, NoDispatchAfterRunEndUnlessDraining) {
  const auto cost = fixtures::oracle_cost_model();
  const auto trace = fixtures::make_trace({{1, "A"}}, 30);
  auto cfg = config_for(StrategyKind::BestBatch);
  auto run = ccsim::run(trace, cost, cfg);
  EXPECT_FALSE(run.requests[0].completed());
  cfg.strategy.drain_at_end = true;
  run = ccsim::run(trace, cost, cfg);
  ASSERT_TRUE(run.requests[0].completed());
  EXPECT_EQ(*run.requests[0].dispatch, TimePoint::seconds(40));
  EXPECT_EQ(*run.requests[0].completion, TimePoint::seconds(44));
}

TEST(Engine, CustomBackendIsUsed) {
  const auto cost = fixtures::oracle_cost_model();
  ScriptedBackend backend;
  Engine engine(cost, config_for(StrategyKind::BestBatch), backend);
  const auto run = engine.run(oracle_trace());
  EXPECT_EQ(backend.loads, 2);
  EXPECT_EQ(backend.unloads, 1);
  EXPECT_EQ(*run.requests[0].completion, TimePoint::seconds(8));  // load 5->6, infer 2 s
  EXPECT_EQ(*run.requests[2].dispatch, TimePoint::seconds(9.5));
}

TEST(Engine, ModeChangesOnlyLoadDrivenTiming) {
  const auto cost = load_cost_model(fixtures::source_path("data/calibration.json").string());
  TrafficSpec spec;
  spec.model_mix = uniform_mix(cost.model_names());
  const auto trace = generate_trace(spec, 4);
  const auto cc = ccsim::run(trace, cost, config_for(StrategyKind::BestBatchTimer, ExecMode::CC, 1200));
  const auto nocc = ccsim::run(trace, cost, config_for(StrategyKind::BestBatchTimer, ExecMode::NoCC, 1200));
  EXPECT_GT(cc.timeline.total(IntervalKind::Load).to_seconds() / std::max(1, cc.swap_count),
            nocc.timeline.total(IntervalKind::Load).to_seconds() / std::max(1, nocc.swap_count));
}

TEST(Engine, Deterministic) {
  const auto cost = load_cost_model(fixtures::source_path("data/calibration.json").string());
  TrafficSpec spec;
  spec.pattern = TrafficPattern::Bursty;
  spec.model_mix = uniform_mix(cost.model_names());
  const auto trace = generate_trace(spec, 8);
  const auto sla = SlaPolicy::seconds(60);
  for (auto kind : {StrategyKind::BestBatch, StrategyKind::SelectBatchTimer}) {
    auto cfg = config_for(kind, ExecMode::CC, 1200);
    cfg.seed = 99;
    EXPECT_EQ(csv_bytes(ccsim::run(trace, cost, cfg), sla), csv_bytes(ccsim::run(trace, cost, cfg), sla));
  }
}

// Structural invariants over many generated runs of the shipped calibration.
TEST(Engine, RunInvariants) {
  const auto cost = load_cost_model(fixtures::source_path("data/calibration.json").string());
  for (auto kind : {StrategyKind::BestBatch, StrategyKind::BestBatchTimer, StrategyKind::SelectBatchTimer,
                    StrategyKind::BestBatchPartialTimer}) {
    for (auto pattern : {TrafficPattern::Gamma, TrafficPattern::Bursty, TrafficPattern::Ramp}) {
      for (std::uint64_t seed : {1, 2}) {
        TrafficSpec spec;
        spec.pattern = pattern;
        spec.mean_rps = 6;
        spec.duration = TimeSpan::seconds(600);
        spec.model_mix = uniform_mix(cost.model_names());
        const auto trace = generate_trace(spec, seed);
        auto cfg = config_for(kind, seed % 2 ? ExecMode::CC : ExecMode::NoCC, 600);
        cfg.strategy.drain_at_end = seed == 2;
        cfg.sla = SlaPolicy::seconds(40);
        const auto run = ccsim::run(trace, cost, cfg);
        SCOPED_TRACE(std::string(to_string(kind)) + "/" + std::string(to_string(pattern)));

        EXPECT_NO_THROW(run.timeline.check_partition());
        TimeSpan sum;
        for (auto k : {IntervalKind::Infer, IntervalKind::Load, IntervalKind::Unload, IntervalKind::Idle}) {
          sum += run.timeline.total(k);
        }
        EXPECT_EQ(sum, run.run_end() - TimePoint{});

        // Conservation: every request lands in at most one batch, batches never exceed max size.
        std::map<RequestId, int> seen;
        for (const auto& b : run.batches) {
          EXPECT_GE(b.size(), 1);
          EXPECT_LE(b.size(), cost.at(b.model).curve.max_batch());
          EXPECT_EQ(b.processing(), processing_time(cost.at(b.model).curve, b.size()));
          for (auto id : b.members) {
            ++seen[id];
            EXPECT_EQ(run.requests[id].model, b.model);
          }
        }
        for (const auto& [id, n] : seen) EXPECT_EQ(n, 1);

        // Per-model FIFO: dispatch order follows arrival order.
        std::map<std::string, std::pair<TimePoint, TimePoint>> last;  // model -> (dispatch, arrival)
        for (const auto& r : run.requests) {
          if (r.dispatch) {
            EXPECT_GE(*r.dispatch, r.arrival);
          }
          if (r.completion) {
            EXPECT_GT(*r.completion, *r.dispatch);
          }
        }
        for (const auto& b : run.batches) {
          for (auto id : b.members) {
            const auto& r = run.requests[id];
            auto it = last.find(r.model);
            if (it != last.end()) {
              EXPECT_GE(r.arrival, it->second.second);
            }
            last[r.model] = {b.start, r.arrival};
          }
        }

        // Without draining nothing starts at or after the end of the window.
        if (!cfg.strategy.drain_at_end) {
          for (const auto& b : run.batches) EXPECT_LT(b.decided_at, TimePoint{} + cfg.run_length);
        } else {
          for (const auto& r : run.requests) EXPECT_TRUE(r.completed());
        }

        // Swap count equals the number of load intervals (cold start included).
        int loads = 0;
        for (const auto& i : run.timeline.intervals) loads += i.kind == IntervalKind::Load;
        EXPECT_EQ(loads, run.swap_count);
      }
    }
  }
}

// Timer bound: a timer strategy never leaves an idle GPU with a request
// queued past its deadline while the window is open.
TEST(Engine, WorkConservingUnderTimers) {
  const auto cost = load_cost_model(fixtures::source_path("data/calibration.json").string());
  TrafficSpec spec;
  spec.mean_rps = 2;
  spec.duration = TimeSpan::seconds(900);
  spec.model_mix = uniform_mix(cost.model_names());
  const auto trace = generate_trace(spec, 12);
  auto cfg = config_for(StrategyKind::BestBatchTimer, ExecMode::NoCC, 900);
  cfg.sla = SlaPolicy::seconds(40);
  const auto run = ccsim::run(trace, cost, cfg);
  const SchedulingContext ctx{cost, cfg.strategy, cfg.sla, cfg.mode};
  for (const auto& gap : run.timeline.intervals) {
    if (gap.kind != IntervalKind::Idle) continue;
    for (const auto& r : run.requests) {
      if (!r.dispatch) continue;
      const auto deadline = ctx.deadline(r.model, r.arrival).deadline;
      // Queued during the idle interval and already due before it ended.
      const bool queued_inside = r.arrival < gap.end && *r.dispatch > gap.start;
      EXPECT_FALSE(queued_inside && deadline < gap.end && gap.end <= TimePoint{} + cfg.run_length)
          << "request " << r.id << " idle gap " << gap.start.count();
    }
  }
}

TEST(Engine, MatchesReplayOracleOnRandomInstances) {
  for (std::uint64_t seed = 1; seed <= 400; ++seed) {
    const auto inst = oracle::random_instance(seed, 12);
    ASSERT_EQ(fixtures::compare_with_oracle(inst), "") << "instance seed " << seed;
  }
}
