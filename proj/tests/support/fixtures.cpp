#include "fixtures.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace fixtures {

fs::path source_path(const std::string& relative) { return fs::path(CCSIM_SOURCE_DIR) / relative; }

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("ccsim-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + CCSIM_CLI + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

int run_cli(const std::string& args, std::string& output) {
  TempDir dir("cli");
  const fs::path log = dir / "output.txt";
  const std::string cmd =
      std::string("\"") + CCSIM_CLI + "\" " + args + " >\"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  output = fs::exists(log) ? read_file(log) : std::string();
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

ccsim::CostModel oracle_cost_model() {
  return ccsim::load_cost_model(source_path("configs/oracle_cost_model.json").string());
}

ccsim::ArrivalTrace make_trace(const std::vector<std::pair<double, std::string>>& arrivals,
                               double duration_s) {
  ccsim::ArrivalTrace trace;
  trace.duration = ccsim::TimeSpan::seconds(duration_s);
  for (const auto& [t, model] : arrivals) {
    trace.arrivals.push_back({ccsim::TimePoint::seconds(t), model});
  }
  return trace;
}

namespace {

ccsim::StrategyKind to_kind(oracle::Strategy s) {
  switch (s) {
    case oracle::Strategy::BestBatch: return ccsim::StrategyKind::BestBatch;
    case oracle::Strategy::BestBatchTimer: return ccsim::StrategyKind::BestBatchTimer;
    case oracle::Strategy::SelectBatchTimer: return ccsim::StrategyKind::SelectBatchTimer;
    case oracle::Strategy::BestBatchPartialTimer: return ccsim::StrategyKind::BestBatchPartialTimer;
  }
  return ccsim::StrategyKind::BestBatch;
}

}  // namespace

ccsim::RunResult run_engine(const oracle::Instance& inst) {
  const auto cost = ccsim::parse_cost_model(oracle::cost_model_json(inst));
  ccsim::RunConfigCore config;
  config.strategy.kind = to_kind(inst.strategy);
  config.strategy.timer_margin = ccsim::TimeSpan::micros(inst.margin_us);
  config.strategy.rate_window = ccsim::TimeSpan::micros(inst.window_us);
  config.strategy.default_rate_rps = inst.default_rate;
  config.strategy.drain_at_end = inst.drain;
  config.sla = ccsim::SlaPolicy(ccsim::TimeSpan::micros(inst.sla_us));
  config.mode = ccsim::ExecMode::CC;
  config.seed = 1;
  config.run_length = ccsim::TimeSpan::micros(inst.run_length_us);

  ccsim::ArrivalTrace trace;
  trace.duration = config.run_length;
  for (const auto& [t, model] : inst.arrivals) {
    trace.arrivals.push_back({ccsim::TimePoint::micros(t), model});
  }
  return ccsim::run(trace, cost, config);
}

std::string compare_with_oracle(const oracle::Instance& inst) {
  const auto expected = oracle::replay(inst);
  const auto got = run_engine(inst);
  std::ostringstream why;
  auto us = [](const std::optional<ccsim::TimePoint>& t) -> std::optional<std::int64_t> {
    if (!t) return std::nullopt;
    return t->count();
  };
  for (std::size_t i = 0; i < inst.arrivals.size(); ++i) {
    const auto& r = got.requests[i];
    if (us(r.dispatch) != expected.dispatch[i]) why << "request " << i << " dispatch differs; ";
    if (us(r.completion) != expected.completion[i]) why << "request " << i << " completion differs; ";
    if (r.batch_id != expected.batch[i]) why << "request " << i << " batch differs; ";
  }
  if (got.swap_count != expected.swaps) {
    why << "swaps " << got.swap_count << " vs " << expected.swaps << "; ";
  }
  using ccsim::IntervalKind;
  if (got.timeline.total(IntervalKind::Infer).count() != expected.infer_us) why << "infer total differs; ";
  if (got.timeline.total(IntervalKind::Load).count() != expected.load_us) why << "load total differs; ";
  if (got.timeline.total(IntervalKind::Unload).count() != expected.unload_us) why << "unload total differs; ";
  return why.str();
}

}  // namespace fixtures
