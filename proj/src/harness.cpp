#include "ccsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "ccsim/csv.hpp"
#include "ccsim/random.hpp"

namespace ccsim {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_fail(const std::string& key, const std::string& what) {
  throw ConfigError(key + ": " + what);
}

const json* find(const json& obj, const char* key) {
  if (!obj.is_object()) return nullptr;
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double get_number(const json& v, const std::string& key) {
  if (!v.is_number()) config_fail(key, "expected a number");
  return v.get<double>();
}

std::string get_string(const json& v, const std::string& key) {
  if (!v.is_string()) config_fail(key, "expected a string");
  return v.get<std::string>();
}

std::uint64_t get_seed(const json& v, const std::string& key) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    config_fail(key, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

TimeSpan get_seconds(const json& v, const std::string& key) {
  const double s = get_number(v, key);
  if (!std::isfinite(s)) config_fail(key, "not finite");
  return TimeSpan::seconds(s);
}

template <typename Fn>
auto keyed(const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const ParameterError& e) {
    config_fail(key, e.what());
  }
}

fs::path resolve(const fs::path& base_dir, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

std::string number_tag(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

CellKey RunConfig::cell_key() const {
  return CellKey{
      .strategy = std::string(to_string(strategy.kind)),
      .pattern = trace ? std::string("trace") : std::string(to_string(traffic.pattern)),
      .mean_rps = traffic.mean_rps,
      .sla_s = sla_s,
      .mode = std::string(to_string(mode)),
      .seed = seed,
  };
}

RunConfig parse_run_config(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) config_fail("config", "expected a JSON object");
  RunConfig c;

  if (auto v = find(doc, "cost_model")) {
    c.cost_model = resolve(base_dir, get_string(*v, "cost_model"));
  } else {
    config_fail("cost_model", "missing");
  }
  if (auto v = find(doc, "strategy")) {
    c.strategy.kind = keyed("strategy", [&] { return parse_strategy_kind(get_string(*v, "strategy")); });
  }
  if (auto params = find(doc, "strategy_params")) {
    if (!params->is_object()) config_fail("strategy_params", "expected an object");
    if (auto v = find(*params, "timer_margin_s")) c.strategy.timer_margin = get_seconds(*v, "strategy_params.timer_margin_s");
    if (auto v = find(*params, "rate_window_s")) c.strategy.rate_window = get_seconds(*v, "strategy_params.rate_window_s");
    if (auto v = find(*params, "default_rate_rps")) c.strategy.default_rate_rps = get_number(*v, "strategy_params.default_rate_rps");
    if (auto v = find(*params, "drain_at_end")) {
      if (!v->is_boolean()) config_fail("strategy_params.drain_at_end", "expected true/false");
      c.strategy.drain_at_end = v->get<bool>();
    }
  }
  keyed("strategy_params", [&] { c.strategy.validate(); return 0; });

  if (auto traffic = find(doc, "traffic")) {
    if (!traffic->is_object()) config_fail("traffic", "expected an object");
    auto& t = c.traffic;
    if (auto v = find(*traffic, "pattern")) {
      t.pattern = keyed("traffic.pattern", [&] { return parse_traffic_pattern(get_string(*v, "traffic.pattern")); });
    }
    if (auto v = find(*traffic, "mean_rps")) t.mean_rps = get_number(*v, "traffic.mean_rps");
    if (auto v = find(*traffic, "duration_s")) t.duration = get_seconds(*v, "traffic.duration_s");
    if (auto p = find(*traffic, "params")) {
      if (!p->is_object()) config_fail("traffic.params", "expected an object");
      if (auto v = find(*p, "gamma_shape")) t.params.gamma_shape = get_number(*v, "traffic.params.gamma_shape");
      if (auto v = find(*p, "burst_period_s")) t.params.burst_period = get_seconds(*v, "traffic.params.burst_period_s");
      if (auto v = find(*p, "burst_duty")) t.params.burst_duty = get_number(*v, "traffic.params.burst_duty");
      if (auto v = find(*p, "ramp_peak_fraction")) t.params.ramp_peak_fraction = get_number(*v, "traffic.params.ramp_peak_fraction");
    }
    if (auto mix = find(*traffic, "model_mix")) {
      if (!mix->is_object()) config_fail("traffic.model_mix", "expected an object of model -> weight");
      for (const auto& [name, weight] : mix->items()) {
        t.model_mix.push_back({name, get_number(weight, "traffic.model_mix." + name)});
      }
      c.uniform_model_mix = t.model_mix.empty();
    }
    if (auto v = find(*traffic, "trace")) c.trace = resolve(base_dir, get_string(*v, "traffic.trace"));
  }
  if (auto v = find(doc, "sla_s")) c.sla_s = get_number(*v, "sla_s");
  if (!(c.sla_s > 0.0)) config_fail("sla_s", "must be positive");
  if (auto v = find(doc, "mode")) {
    c.mode = keyed("mode", [&] { return parse_exec_mode(get_string(*v, "mode")); });
  }
  if (auto v = find(doc, "run_length_s")) c.run_length = get_seconds(*v, "run_length_s");
  if (c.run_length <= TimeSpan{}) config_fail("run_length_s", "must be positive");
  if (auto v = find(doc, "seed")) c.seed = get_seed(*v, "seed");

  // Validate the traffic parameters now, with a placeholder mix when uniform.
  TrafficSpec probe = c.traffic;
  if (c.uniform_model_mix) probe.model_mix = {{"_", 1.0}};
  keyed("traffic", [&] { probe.validate(); return 0; });
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) config_fail("config", "cannot read '" + path.string() + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    config_fail("config", "'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_run_config(doc, path.parent_path());
}

json to_json(const RunConfig& c) {
  json mix = json::object();
  if (!c.uniform_model_mix) {
    for (const auto& e : c.traffic.model_mix) mix[e.model] = e.weight;
  }
  json traffic = {
      {"pattern", to_string(c.traffic.pattern)},
      {"mean_rps", c.traffic.mean_rps},
      {"duration_s", c.traffic.duration.to_seconds()},
      {"params",
       {{"gamma_shape", c.traffic.params.gamma_shape},
        {"burst_period_s", c.traffic.params.burst_period.to_seconds()},
        {"burst_duty", c.traffic.params.burst_duty},
        {"ramp_peak_fraction", c.traffic.params.ramp_peak_fraction}}},
      {"model_mix", mix},
  };
  if (c.trace) traffic["trace"] = fs::absolute(*c.trace).string();
  return json{
      {"cost_model", fs::absolute(c.cost_model).string()},
      {"strategy", to_string(c.strategy.kind)},
      {"strategy_params",
       {{"timer_margin_s", c.strategy.timer_margin.to_seconds()},
        {"rate_window_s", c.strategy.rate_window.to_seconds()},
        {"default_rate_rps", c.strategy.default_rate_rps},
        {"drain_at_end", c.strategy.drain_at_end}}},
      {"traffic", traffic},
      {"sla_s", c.sla_s},
      {"mode", to_string(c.mode)},
      {"run_length_s", c.run_length.to_seconds()},
      {"seed", c.seed},
  };
}

std::uint64_t cell_seed(const RunConfig& config) {
  const std::string key = std::string(to_string(config.traffic.pattern)) + "|" +
                          number_tag(config.traffic.mean_rps);
  return derive_seed(config.seed, key);
}

CellOutput run_cell(const RunConfig& config, const CostModel& cost) {
  const std::uint64_t seed = cell_seed(config);
  ArrivalTrace trace;
  if (config.trace) {
    std::ifstream in(*config.trace);
    if (!in) config_fail("traffic.trace", "cannot read '" + config.trace->string() + "'");
    trace = read_trace_csv(in, config.run_length);
  } else {
    TrafficSpec spec = config.traffic;
    if (config.uniform_model_mix) spec.model_mix = uniform_mix(cost.model_names());
    trace = keyed("traffic", [&] { return generate_trace(spec, seed); });
  }
  for (const auto& a : trace.arrivals) {
    if (!cost.contains(a.model)) config_fail("traffic.model_mix", "unknown model '" + a.model + "'");
  }

  const SlaPolicy sla = SlaPolicy::seconds(config.sla_s);
  RunConfigCore core{.strategy = config.strategy, .sla = sla, .mode = config.mode, .seed = seed,
                     .run_length = config.run_length};
  CellOutput out;
  out.run = ccsim::run(trace, cost, core);
  out.requests = request_records(out.run, sla);
  out.batches = batch_records(out.run);
  out.summary = summarize(out.run, sla, config.cell_key());
  if (config.trace) out.summary.cell.mean_rps = realized_mean(trace);
  return out;
}

RunSummary run_cell_to_dir(const RunConfig& config, const CostModel& cost, const fs::path& out_dir) {
  auto out = run_cell(config, cost);
  write_outputs(out.requests, out.batches, out.run.timeline, out.summary, out_dir);
  std::ofstream echo(out_dir / "config.json", std::ios::binary | std::ios::trunc);
  if (!echo) throw ConfigError("cannot write '" + (out_dir / "config.json").string() + "'");
  echo << to_json(config).dump(2) << '\n';
  return out.summary;
}

std::vector<RunConfig> SweepSpec::cells() const {
  std::vector<RunConfig> out;
  for (auto strategy : strategies)
    for (auto pattern : patterns)
      for (double mean : means)
        for (double sla : slas)
          for (auto mode : modes)
            for (auto seed : seeds) {
              RunConfig c = base;
              c.strategy.kind = strategy;
              c.traffic.pattern = pattern;
              c.traffic.mean_rps = mean;
              c.sla_s = sla;
              c.mode = mode;
              c.seed = seed;
              out.push_back(std::move(c));
            }
  return out;
}

SweepSpec parse_sweep_spec(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) config_fail("sweep", "expected a JSON object");
  const json* base = find(doc, "base");
  if (!base) config_fail("base", "missing");
  SweepSpec spec;
  spec.base = parse_run_config(*base, base_dir);

  const json empty = json::object();
  const json& grid = find(doc, "grid") ? doc["grid"] : empty;
  auto list = [&](const char* key, auto parse, auto fallback) {
    using T = decltype(fallback);
    std::vector<T> values;
    if (auto v = find(grid, key)) {
      if (!v->is_array() || v->empty()) config_fail(std::string("grid.") + key, "expected a non-empty array");
      for (const auto& item : *v) values.push_back(parse(item, std::string("grid.") + key));
    } else {
      values.push_back(fallback);
    }
    return values;
  };
  spec.strategies = list("strategy", [](const json& v, const std::string& k) {
    return keyed(k, [&] { return parse_strategy_kind(get_string(v, k)); });
  }, spec.base.strategy.kind);
  spec.patterns = list("pattern", [](const json& v, const std::string& k) {
    return keyed(k, [&] { return parse_traffic_pattern(get_string(v, k)); });
  }, spec.base.traffic.pattern);
  spec.means = list("mean_rps", [](const json& v, const std::string& k) {
    const double m = get_number(v, k);
    if (!(m > 0.0)) config_fail(k, "must be positive");
    return m;
  }, spec.base.traffic.mean_rps);
  spec.slas = list("sla_s", [](const json& v, const std::string& k) {
    const double s = get_number(v, k);
    if (!(s > 0.0)) config_fail(k, "must be positive");
    return s;
  }, spec.base.sla_s);
  spec.modes = list("mode", [](const json& v, const std::string& k) {
    return keyed(k, [&] { return parse_exec_mode(get_string(v, k)); });
  }, spec.base.mode);
  spec.seeds = list("seed", [](const json& v, const std::string& k) { return get_seed(v, k); },
                    spec.base.seed);
  return spec;
}

SweepSpec load_sweep_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) config_fail("config", "cannot read '" + path.string() + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    config_fail("config", "'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_sweep_spec(doc, path.parent_path());
}

SweepSpec default_sweep(const fs::path& cost_model) {
  SweepSpec spec;
  spec.base.cost_model = cost_model;
  spec.strategies = {StrategyKind::BestBatch, StrategyKind::BestBatchTimer,
                     StrategyKind::SelectBatchTimer, StrategyKind::BestBatchPartialTimer};
  spec.patterns = {TrafficPattern::Gamma, TrafficPattern::Bursty, TrafficPattern::Ramp};
  spec.means = {2.0, 4.0, 8.0};
  spec.slas = {40.0, 60.0, 80.0};
  spec.modes = {ExecMode::CC, ExecMode::NoCC};
  spec.seeds = {1, 2, 3, 4, 5};
  return spec;
}

namespace {

std::string cell_dir_name(const CellKey& k) {
  return k.strategy + "-" + k.pattern + "-m" + number_tag(k.mean_rps) + "-sla" +
         number_tag(k.sla_s) + "-" + k.mode + "-s" + std::to_string(k.seed);
}

}  // namespace

std::string cell_dir_name(const RunConfig& config) { return cell_dir_name(config.cell_key()); }

bool cell_key_less(const CellKey& a, const CellKey& b) {
  return std::tie(a.strategy, a.pattern, a.mean_rps, a.sla_s, a.mode, a.seed) <
         std::tie(b.strategy, b.pattern, b.mean_rps, b.sla_s, b.mode, b.seed);
}

bool SweepResult::all_ok() const {
  return std::all_of(statuses.begin(), statuses.end(), [](const auto& s) { return s.ok; });
}

SweepResult run_sweep(const SweepSpec& spec, const fs::path& out_dir, int jobs) {
  const auto cells = spec.cells();
  if (cells.empty()) config_fail("grid", "the sweep has no cells");
  const CostModel cost = load_cost_model(spec.base.cost_model.string());

  std::vector<std::optional<RunSummary>> summaries(cells.size());
  std::vector<SweepCellStatus> statuses(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const std::string name = cell_dir_name(cells[i]);
      statuses[i].cell = name;
      try {
        summaries[i] = run_cell_to_dir(cells[i], cost, out_dir / name);
        statuses[i].ok = true;
      } catch (const std::exception& e) {
        statuses[i].message = e.what();
      }
    }
  };
  const int workers = std::clamp(jobs, 1, static_cast<int>(cells.size()));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  SweepResult result;
  std::vector<std::size_t> order(cells.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cell_key_less(cells[a].cell_key(), cells[b].cell_key());
  });
  for (std::size_t i : order) {
    if (summaries[i]) result.summaries.push_back(*summaries[i]);
    result.statuses.push_back(statuses[i]);
  }

  fs::create_directories(out_dir);
  std::ofstream summary_out(out_dir / "sweep_summary.csv", std::ios::binary | std::ios::trunc);
  if (!summary_out) throw ConfigError("cannot write '" + (out_dir / "sweep_summary.csv").string() + "'");
  write_summary_header(summary_out);
  for (const auto& s : result.summaries) write_summary_row(s, summary_out);

  std::ofstream status_out(out_dir / "sweep_status.csv", std::ios::binary | std::ios::trunc);
  status_out << "cell,status,message\n";
  for (const auto& s : result.statuses) {
    std::string msg = s.message;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    status_out << s.cell << ',' << (s.ok ? "ok" : "failed") << ',' << msg << '\n';
  }
  return result;
}

std::vector<ObsRow> obs_table(const CostModel& cost) {
  std::vector<ObsRow> rows;
  for (const auto& m : cost.models()) {
    const TimeSpan t = processing_time(m.curve, m.obs);
    rows.push_back({m.id.name, m.obs, m.obs / t.to_seconds(), m.curve.max_batch()});
  }
  return rows;
}

void print_obs_table(const std::vector<ObsRow>& rows, std::ostream& out) {
  for (const auto& r : rows) {
    out << r.model << ": OBS=" << r.obs << ", peak " << format_fixed(r.peak_rps, 1)
        << " rps (max batch " << r.max_batch << ")\n";
  }
}

double latency_gap_pct(double cc, double nocc) {
  if (cc == 0.0) return nocc == 0.0 ? 0.0 : -100.0;
  return (cc - nocc) / cc * 100.0;
}

double relative_gain_pct(double cc, double nocc) {
  if (cc == 0.0) return nocc == 0.0 ? 0.0 : 100.0;
  return (nocc - cc) / cc * 100.0;
}

namespace {

struct CellData {
  RunSummary summary;
  double mean_latency_s = 0.0;
};

using PairKey = std::tuple<std::string, std::string, double, double, std::uint64_t>;

PairKey pair_key(const CellKey& k) { return {k.strategy, k.pattern, k.mean_rps, k.sla_s, k.seed}; }

std::map<PairKey, CellData> load_cells(const fs::path& dir, const std::string& mode) {
  std::map<PairKey, CellData> cells;
  const bool sweep = fs::exists(dir / "sweep_summary.csv");
  const fs::path summary_path = sweep ? dir / "sweep_summary.csv" : dir / "summary.csv";
  if (!fs::exists(summary_path)) {
    config_fail("compare", "no summary.csv or sweep_summary.csv in '" + dir.string() + "'");
  }
  for (auto& s : read_summary_csv(summary_path)) {
    if (s.cell.mode != mode) continue;
    const fs::path cell_dir = sweep ? dir / cell_dir_name(s.cell) : dir;
    const auto records = read_requests_csv(cell_dir / "requests.csv");
    CellData data{s, mean_latency_s(records).value_or(0.0)};
    cells.emplace(pair_key(s.cell), std::move(data));
  }
  return cells;
}

}  // namespace

std::vector<ComparisonRow> compare_dirs(const fs::path& dir_cc, const fs::path& dir_nocc) {
  const auto cc = load_cells(dir_cc, "cc");
  const auto nocc = load_cells(dir_nocc, "nocc");
  if (cc.empty()) config_fail("compare", "no cc cells in '" + dir_cc.string() + "'");
  if (cc.size() != nocc.size()) {
    config_fail("compare", "cell sets differ (" + std::to_string(cc.size()) + " cc vs " +
                               std::to_string(nocc.size()) + " nocc)");
  }
  std::vector<ComparisonRow> rows;
  for (const auto& [key, a] : cc) {
    auto it = nocc.find(key);
    if (it == nocc.end()) {
      config_fail("compare", "no nocc counterpart for cell " + cell_dir_name(a.summary.cell));
    }
    const auto& b = it->second;
    ComparisonRow row;
    row.cell = a.summary.cell;
    row.cell.mode.clear();
    row.mean_latency_cc_s = a.mean_latency_s;
    row.mean_latency_nocc_s = b.mean_latency_s;
    row.latency_gap_pct = latency_gap_pct(a.mean_latency_s, b.mean_latency_s);
    row.attainment_gap_pp = b.summary.attainment_pct - a.summary.attainment_pct;
    row.throughput_gap_pct =
        relative_gain_pct(a.summary.overall_throughput_rps, b.summary.overall_throughput_rps);
    row.util_gap_pct = relative_gain_pct(a.summary.gpu_util_pct, b.summary.gpu_util_pct);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_comparison_csv(const std::vector<ComparisonRow>& rows, std::ostream& out) {
  out << "strategy,pattern,mean_rps,sla_s,seed,mean_latency_cc_s,mean_latency_nocc_s,"
         "latency_gap_pct,attainment_gap_pp,throughput_gap_pct,util_gap_pct\n";
  for (const auto& r : rows) {
    out << r.cell.strategy << ',' << r.cell.pattern << ',' << format_fixed(r.cell.mean_rps, 6) << ','
        << format_fixed(r.cell.sla_s, 6) << ',' << r.cell.seed << ','
        << format_fixed(r.mean_latency_cc_s, 6) << ',' << format_fixed(r.mean_latency_nocc_s, 6)
        << ',' << format_fixed(r.latency_gap_pct, 2) << ',' << format_fixed(r.attainment_gap_pp, 2)
        << ',' << format_fixed(r.throughput_gap_pct, 2) << ',' << format_fixed(r.util_gap_pct, 2)
        << '\n';
  }
}

}  // namespace ccsim
