#include "ccsim/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>

#include "ccsim/csv.hpp"

namespace ccsim {

const std::vector<std::string> kRequestColumns = {
    "request_id", "model", "arrival_s", "dispatch_s", "completion_s",
    "batch_id", "batch_size", "latency_s", "sla_met", "fulfilled"};
const std::vector<std::string> kBatchColumns = {
    "batch_id", "model", "size", "swap_incurred", "load_s",
    "start_s", "end_s", "processing_s", "inference_throughput_rps"};
const std::vector<std::string> kTimelineColumns = {"start_s", "end_s", "kind", "model"};
const std::vector<std::string> kSummaryColumns = {
    "strategy", "pattern", "mean_rps", "sla_s", "mode", "total_requests",
    "fulfilled", "attainment_pct", "overall_throughput_rps", "inference_rate_rps",
    "gpu_util_pct", "load_pct", "unload_pct", "idle_pct", "swap_count",
    "runtime_s", "seed"};

std::vector<RequestRecord> request_records(const RunResult& run, const SlaPolicy& sla) {
  std::vector<RequestRecord> records;
  records.reserve(run.requests.size());
  for (const auto& r : run.requests) {
    RequestRecord rec;
    rec.request_id = r.id;
    rec.model = r.model;
    rec.arrival = r.arrival;
    rec.dispatch = r.dispatch;
    rec.completion = r.completion;
    rec.batch_id = r.batch_id;
    rec.fulfilled = r.completed();
    if (r.batch_id) rec.batch_size = run.batches.at(*r.batch_id).size();
    rec.latency = latency_of(r);
    rec.sla_met = meets_sla(r, sla);
    records.push_back(std::move(rec));
  }
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return a.arrival != b.arrival ? a.arrival < b.arrival : a.request_id < b.request_id;
  });
  return records;
}

std::vector<BatchRecord> batch_records(const RunResult& run) {
  std::vector<BatchRecord> out;
  out.reserve(run.batches.size());
  for (const auto& b : run.batches) {
    out.push_back(BatchRecord{
        .batch_id = b.id,
        .model = b.model,
        .size = b.size(),
        .swap_incurred = b.swap_incurred,
        .load = b.load_time,
        .start = b.start,
        .end = b.end,
        .processing = b.processing(),
    });
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.start < b.start; });
  return out;
}

Attainment attainment(const std::vector<RequestRecord>& records, const SlaPolicy& sla) {
  if (records.empty()) return {100.0, true};
  const auto met = std::count_if(records.begin(), records.end(), [&](const auto& r) {
    return r.fulfilled && r.latency && *r.latency <= sla.limit();
  });
  return {100.0 * static_cast<double>(met) / static_cast<double>(records.size()), false};
}

double overall_throughput(const std::vector<RequestRecord>& records, TimeSpan runtime) {
  if (runtime <= TimeSpan{}) throw ParameterError("runtime must be positive");
  const auto fulfilled =
      std::count_if(records.begin(), records.end(), [](const auto& r) { return r.fulfilled; });
  return static_cast<double>(fulfilled) / runtime.to_seconds();
}

double inference_rate(const std::vector<BatchRecord>& batches) {
  std::int64_t requests = 0;
  TimeSpan busy;
  for (const auto& b : batches) {
    requests += b.size;
    busy += b.processing;
  }
  if (busy <= TimeSpan{}) return 0.0;
  return static_cast<double>(requests) / busy.to_seconds();
}

std::optional<double> mean_latency_s(const std::vector<RequestRecord>& records) {
  std::int64_t total_us = 0;
  std::int64_t n = 0;
  for (const auto& r : records) {
    if (!r.latency) continue;
    total_us += r.latency->count();
    ++n;
  }
  if (n == 0) return std::nullopt;
  return static_cast<double>(total_us) / static_cast<double>(n) * 1e-6;
}

GpuBreakdown gpu_breakdown(const Timeline& timeline) {
  timeline.check_partition();
  const std::int64_t runtime = (timeline.end() - TimePoint{}).count();
  if (runtime <= 0) return {};

  constexpr std::int64_t kScale = 10'000;  // hundredths of a percent
  const std::array<IntervalKind, 4> kinds = {IntervalKind::Infer, IntervalKind::Load,
                                             IntervalKind::Unload, IntervalKind::Idle};
  std::array<std::int64_t, 4> units{};
  std::array<__int128, 4> remainders{};
  std::int64_t assigned = 0;
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    const __int128 scaled = static_cast<__int128>(timeline.total(kinds[k]).count()) * kScale;
    units[k] = static_cast<std::int64_t>(scaled / runtime);
    remainders[k] = scaled % runtime;
    assigned += units[k];
  }
  std::array<std::size_t, 4> order = {0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t i = 0; assigned < kScale; ++i, ++assigned) ++units[order[i % 4]];

  return {units[0] / 100.0, units[1] / 100.0, units[2] / 100.0, units[3] / 100.0};
}

RunSummary summarize(const RunResult& run, const SlaPolicy& sla, CellKey cell) {
  const auto records = request_records(run, sla);
  const auto batches = batch_records(run);
  const auto att = attainment(records, sla);
  const auto breakdown = gpu_breakdown(run.timeline);
  const TimeSpan runtime = run.run_end() - TimePoint{};

  RunSummary s;
  s.cell = std::move(cell);
  s.total_requests = records.size();
  s.fulfilled = static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const auto& r) { return r.fulfilled; }));
  s.attainment_pct = att.pct;
  s.empty_run = att.no_requests;
  s.overall_throughput_rps = overall_throughput(records, runtime);
  s.inference_rate_rps = inference_rate(batches);
  s.gpu_util_pct = breakdown.infer_pct;
  s.load_pct = breakdown.load_pct;
  s.unload_pct = breakdown.unload_pct;
  s.idle_pct = breakdown.idle_pct;
  s.swap_count = run.swap_count;
  s.runtime = runtime;
  return s;
}

namespace {

template <typename T>
std::string opt_seconds(const std::optional<T>& v) {
  return v ? format_seconds(*v) : std::string{};
}

void write_header(const std::vector<std::string>& columns, std::ostream& out) {
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
}

const char* flag(bool b) { return b ? "true" : "false"; }

bool parse_flag(const std::string& text, const std::string& where) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw SchemaError(where + ": expected true/false, got '" + text + "'");
}

std::optional<std::int64_t> parse_opt_micros(const std::string& text, const std::string& where) {
  if (text.empty()) return std::nullopt;
  try {
    return parse_seconds(text);
  } catch (const std::invalid_argument&) {
    throw SchemaError(where + ": bad seconds value '" + text + "'");
  }
}

}  // namespace

void write_requests_csv(const std::vector<RequestRecord>& records, std::ostream& out) {
  write_header(kRequestColumns, out);
  for (const auto& r : records) {
    out << r.request_id << ',' << r.model << ',' << format_seconds(r.arrival) << ','
        << opt_seconds(r.dispatch) << ',' << opt_seconds(r.completion) << ','
        << (r.batch_id ? std::to_string(*r.batch_id) : "") << ','
        << (r.fulfilled ? std::to_string(r.batch_size) : "") << ',' << opt_seconds(r.latency)
        << ',' << flag(r.sla_met) << ',' << flag(r.fulfilled) << '\n';
  }
}

void write_batches_csv(const std::vector<BatchRecord>& batches, std::ostream& out) {
  write_header(kBatchColumns, out);
  for (const auto& b : batches) {
    out << b.batch_id << ',' << b.model << ',' << b.size << ',' << flag(b.swap_incurred) << ','
        << format_seconds(b.load) << ',' << format_seconds(b.start) << ',' << format_seconds(b.end)
        << ',' << format_seconds(b.processing) << ','
        << format_fixed(b.inference_throughput_rps(), 6) << '\n';
  }
}

void write_timeline_csv(const Timeline& timeline, std::ostream& out) {
  write_header(kTimelineColumns, out);
  for (const auto& i : timeline.intervals) {
    out << format_seconds(i.start) << ',' << format_seconds(i.end) << ',' << to_string(i.kind)
        << ',' << i.model << '\n';
  }
}

void write_summary_header(std::ostream& out) { write_header(kSummaryColumns, out); }

void write_summary_row(const RunSummary& s, std::ostream& out) {
  out << s.cell.strategy << ',' << s.cell.pattern << ',' << format_fixed(s.cell.mean_rps, 6) << ','
      << format_fixed(s.cell.sla_s, 6) << ',' << s.cell.mode << ',' << s.total_requests << ','
      << s.fulfilled << ',' << format_fixed(s.attainment_pct, 2) << ','
      << format_fixed(s.overall_throughput_rps, 6) << ','
      << format_fixed(s.inference_rate_rps, 6) << ',' << format_fixed(s.gpu_util_pct, 2) << ','
      << format_fixed(s.load_pct, 2) << ',' << format_fixed(s.unload_pct, 2) << ','
      << format_fixed(s.idle_pct, 2) << ',' << s.swap_count << ',' << format_seconds(s.runtime)
      << ',' << s.cell.seed << '\n';
}

void write_outputs(const std::vector<RequestRecord>& records, const std::vector<BatchRecord>& batches,
                   const Timeline& timeline, const RunSummary& summary,
                   const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + out_dir.string() + "': " + ec.message());

  auto emit = [&](const char* name, auto&& body) {
    const auto path = out_dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    body(out);
    out.flush();
    if (!out) throw ConfigError("write failed for '" + path.string() + "'");
  };
  emit("requests.csv", [&](std::ostream& o) { write_requests_csv(records, o); });
  emit("batches.csv", [&](std::ostream& o) { write_batches_csv(batches, o); });
  emit("timeline.csv", [&](std::ostream& o) { write_timeline_csv(timeline, o); });
  emit("summary.csv", [&](std::ostream& o) {
    write_summary_header(o);
    write_summary_row(summary, o);
  });
}

std::vector<RequestRecord> read_requests_csv(const std::filesystem::path& path) {
  const auto table = read_csv_file(path.string(), kRequestColumns);
  std::vector<RequestRecord> out;
  const auto col = [&](const char* name) { return table.column(name); };
  const std::size_t c_id = col("request_id"), c_model = col("model"), c_arr = col("arrival_s"),
                    c_disp = col("dispatch_s"), c_comp = col("completion_s"),
                    c_batch = col("batch_id"), c_size = col("batch_size"),
                    c_lat = col("latency_s"), c_met = col("sla_met"), c_ful = col("fulfilled");
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::string where = path.string() + " row " + std::to_string(i + 1);
    RequestRecord r;
    try {
      r.request_id = std::stoull(row[c_id]);
      if (!row[c_batch].empty()) r.batch_id = std::stoull(row[c_batch]);
      if (!row[c_size].empty()) r.batch_size = std::stoi(row[c_size]);
    } catch (const std::exception&) {
      throw SchemaError(where + ": bad integer field");
    }
    r.model = row[c_model];
    r.arrival = TimePoint::micros(parse_opt_micros(row[c_arr], where).value_or(0));
    if (auto v = parse_opt_micros(row[c_disp], where)) r.dispatch = TimePoint::micros(*v);
    if (auto v = parse_opt_micros(row[c_comp], where)) r.completion = TimePoint::micros(*v);
    if (auto v = parse_opt_micros(row[c_lat], where)) r.latency = TimeSpan::micros(*v);
    r.sla_met = parse_flag(row[c_met], where);
    r.fulfilled = parse_flag(row[c_ful], where);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RunSummary> read_summary_csv(const std::filesystem::path& path) {
  const auto table = read_csv_file(path.string(), kSummaryColumns);
  std::vector<RunSummary> out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const auto get = [&](const char* name) -> const std::string& { return row[table.column(name)]; };
    RunSummary s;
    try {
      s.cell.strategy = get("strategy");
      s.cell.pattern = get("pattern");
      s.cell.mean_rps = std::stod(get("mean_rps"));
      s.cell.sla_s = std::stod(get("sla_s"));
      s.cell.mode = get("mode");
      s.cell.seed = std::stoull(get("seed"));
      s.total_requests = std::stoull(get("total_requests"));
      s.fulfilled = std::stoull(get("fulfilled"));
      s.attainment_pct = std::stod(get("attainment_pct"));
      s.overall_throughput_rps = std::stod(get("overall_throughput_rps"));
      s.inference_rate_rps = std::stod(get("inference_rate_rps"));
      s.gpu_util_pct = std::stod(get("gpu_util_pct"));
      s.load_pct = std::stod(get("load_pct"));
      s.unload_pct = std::stod(get("unload_pct"));
      s.idle_pct = std::stod(get("idle_pct"));
      s.swap_count = std::stoi(get("swap_count"));
      s.runtime = TimeSpan::micros(parse_seconds(get("runtime_s")));
    } catch (const SchemaError&) {
      throw;
    } catch (const std::exception&) {
      throw SchemaError(path.string() + " row " + std::to_string(i + 1) + ": bad numeric field");
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace ccsim
