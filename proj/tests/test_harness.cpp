#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "ccsim/harness.hpp"
#include "fixtures.hpp"

using namespace ccsim;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json base_doc() {
  return json{{"cost_model", fixtures::source_path("data/calibration.json").string()},
              {"strategy", "best_batch_timer"},
              {"traffic", {{"pattern", "gamma"}, {"mean_rps", 2}, {"duration_s", 300}}},
              {"sla_s", 40},
              {"mode", "cc"},
              {"run_length_s", 300},
              {"seed", 3}};
}

std::string error_of(const json& doc) {
  try {
    parse_run_config(doc, fixtures::source_path("configs"));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Harness, ParsesRunConfig) {
  const auto c = parse_run_config(base_doc(), ".");
  EXPECT_EQ(c.strategy.kind, StrategyKind::BestBatchTimer);
  EXPECT_EQ(c.traffic.pattern, TrafficPattern::Gamma);
  EXPECT_DOUBLE_EQ(c.traffic.mean_rps, 2);
  EXPECT_DOUBLE_EQ(c.sla_s, 40);
  EXPECT_EQ(c.mode, ExecMode::CC);
  EXPECT_EQ(c.run_length, TimeSpan::seconds(300));
  EXPECT_EQ(c.seed, 3u);
  EXPECT_TRUE(c.uniform_model_mix);
}

TEST(Harness, RelativePathsResolveAgainstConfigDir) {
  const auto c = load_run_config(fixtures::source_path("configs/oracle_run.json"));
  EXPECT_TRUE(fs::exists(c.cost_model));
  ASSERT_TRUE(c.trace.has_value());
  EXPECT_TRUE(fs::exists(*c.trace));
}

TEST(Harness, ConfigErrorsNameTheKey) {
  auto doc = base_doc();
  doc["strategy"] = "fastest";
  EXPECT_EQ(error_of(doc).rfind("strategy", 0), 0u) << error_of(doc);
  doc = base_doc();
  doc["sla_s"] = -1;
  EXPECT_EQ(error_of(doc).rfind("sla_s", 0), 0u);
  doc = base_doc();
  doc["traffic"]["mean_rps"] = 0;
  EXPECT_EQ(error_of(doc).rfind("traffic", 0), 0u);
  doc = base_doc();
  doc.erase("cost_model");
  EXPECT_EQ(error_of(doc).rfind("cost_model", 0), 0u);
  doc = base_doc();
  doc["mode"] = "tdx";
  EXPECT_EQ(error_of(doc).rfind("mode", 0), 0u);
  EXPECT_THROW(load_run_config("/nonexistent/run.json"), ConfigError);
}

TEST(Harness, ConfigJsonRoundTrip) {
  const auto c = parse_run_config(base_doc(), ".");
  const auto again = parse_run_config(to_json(c), "/");
  EXPECT_EQ(to_json(again).dump(), to_json(c).dump());
}

TEST(Harness, CellSeedSharedAcrossPairedCells) {
  auto a = parse_run_config(base_doc(), ".");
  auto b = a;
  b.mode = ExecMode::NoCC;
  b.sla_s = 80;
  b.strategy.kind = StrategyKind::SelectBatchTimer;
  EXPECT_EQ(cell_seed(a), cell_seed(b));
  auto c = a;
  c.traffic.pattern = TrafficPattern::Ramp;
  auto d = a;
  d.traffic.mean_rps = 4;
  auto e = a;
  e.seed = 4;
  const std::set<std::uint64_t> seeds{cell_seed(a), cell_seed(c), cell_seed(d), cell_seed(e)};
  EXPECT_EQ(seeds.size(), 4u);
}

TEST(Harness, PairedCellsSeeIdenticalTraffic) {
  const auto cost = load_cost_model(fixtures::source_path("data/calibration.json").string());
  auto a = parse_run_config(base_doc(), ".");
  auto b = a;
  b.mode = ExecMode::NoCC;
  b.strategy.kind = StrategyKind::BestBatch;
  const auto ra = run_cell(a, cost);
  const auto rb = run_cell(b, cost);
  ASSERT_EQ(ra.requests.size(), rb.requests.size());
  for (std::size_t i = 0; i < ra.requests.size(); ++i) {
    EXPECT_EQ(ra.requests[i].arrival, rb.requests[i].arrival);
    EXPECT_EQ(ra.requests[i].model, rb.requests[i].model);
  }
}

TEST(Harness, DefaultSweepShape) {
  const auto spec = default_sweep(fixtures::source_path("data/calibration.json"));
  EXPECT_EQ(spec.cells().size(), 4u * 3u * 3u * 3u * 2u * 5u);
  std::set<std::string> names;
  for (const auto& c : spec.cells()) names.insert(cell_dir_name(c));
  EXPECT_EQ(names.size(), spec.cells().size());
}

TEST(Harness, SweepSpecParsing) {
  const auto spec = load_sweep_spec(fixtures::source_path("configs/example_sweep.json"));
  EXPECT_EQ(spec.cells().size(), 2u * 2u * 1u * 2u * 2u * 2u);
  json bad = {{"base", base_doc()}, {"grid", {{"strategy", json::array()}}}};
  EXPECT_THROW(parse_sweep_spec(bad, "."), ConfigError);
  json bad_mode = {{"base", base_doc()}, {"grid", {{"mode", {"cc", "sgx"}}}}};
  EXPECT_THROW(parse_sweep_spec(bad_mode, "."), ConfigError);
}

TEST(Harness, SweepIsDeterministicAcrossJobCounts) {
  SweepSpec spec;
  spec.base = parse_run_config(base_doc(), ".");
  spec.strategies = {StrategyKind::BestBatch, StrategyKind::BestBatchTimer, StrategyKind::SelectBatchTimer,
                     StrategyKind::BestBatchPartialTimer};
  spec.patterns = {TrafficPattern::Gamma, TrafficPattern::Bursty, TrafficPattern::Ramp};
  spec.means = {2};
  spec.slas = {40, 60, 80};
  spec.modes = {ExecMode::CC, ExecMode::NoCC};
  spec.seeds = {1};
  fixtures::TempDir one("sweep1"), four("sweep4");
  const auto r1 = run_sweep(spec, one.path(), 1);
  const auto r4 = run_sweep(spec, four.path(), 4);
  EXPECT_TRUE(r1.all_ok());
  EXPECT_EQ(r1.summaries.size(), 72u);
  const auto s1 = fixtures::read_file(one / "sweep_summary.csv");
  EXPECT_EQ(std::count(s1.begin(), s1.end(), '\n'), 73);
  EXPECT_EQ(s1, fixtures::read_file(four / "sweep_summary.csv"));
  for (const auto& cell : spec.cells()) {
    const auto name = cell_dir_name(cell);
    for (const char* f : {"requests.csv", "batches.csv", "timeline.csv", "summary.csv"}) {
      ASSERT_EQ(fixtures::read_file(one / name / f), fixtures::read_file(four / name / f)) << name << f;
    }
  }
  // Summaries come back in key order.
  for (std::size_t i = 1; i < r1.summaries.size(); ++i) {
    EXPECT_TRUE(cell_key_less(r1.summaries[i - 1].cell, r1.summaries[i].cell));
  }
}

TEST(Harness, CompareGaps) {
  EXPECT_DOUBLE_EQ(latency_gap_pct(50, 40), 20.0);
  EXPECT_DOUBLE_EQ(latency_gap_pct(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(relative_gain_pct(2, 3), 50.0);
  EXPECT_DOUBLE_EQ(relative_gain_pct(0, 0), 0.0);
}

TEST(Harness, CompareCcAgainstNocc) {
  const auto cost = load_cost_model(fixtures::source_path("data/calibration.json").string());
  fixtures::TempDir dir("cmp");
  auto cc = parse_run_config(base_doc(), ".");
  auto nocc = cc;
  nocc.mode = ExecMode::NoCC;
  run_cell_to_dir(cc, cost, dir / "cc");
  run_cell_to_dir(nocc, cost, dir / "nocc");
  const auto rows = compare_dirs(dir / "cc", dir / "nocc");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_GT(rows[0].mean_latency_cc_s, rows[0].mean_latency_nocc_s);

  // Each side only contributes cells of its own mode.
  EXPECT_THROW(compare_dirs(dir / "cc", dir / "cc"), ConfigError);
  EXPECT_THROW(compare_dirs(dir / "cc", dir / "missing"), ConfigError);

  std::ostringstream out;
  write_comparison_csv(rows, out);
  EXPECT_EQ(out.str().rfind("strategy,pattern,mean_rps,sla_s,seed,mean_latency_cc_s", 0), 0u);
}

TEST(Harness, ObsTable) {
  fixtures::TempDir dir("obs");
  const std::string p = R"({"load_mean_s": 1, "load_std_s": 0, "unload_mean_s": 0.01, "unload_std_s": 0})";
  fixtures::write_file(dir / "c.json", R"({"models": [{"name": "m", "curve": [[1, 0.25], [2, 0.26], [4, 0.5], [8, 1.2]], "cc": )" +
                                           p + R"(, "nocc": )" + p + "}]}");
  const auto rows = obs_table(load_cost_model((dir / "c.json").string()));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].obs, 4);
  std::ostringstream out;
  print_obs_table(rows, out);
  EXPECT_NE(out.str().find("OBS=4, peak 8.0 rps"), std::string::npos) << out.str();
  EXPECT_EQ(obs_table(load_cost_model(fixtures::source_path("data/calibration.json").string())).size(), 3u);
}
