#include "ccsim/traffic.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <ostream>

#include "ccsim/csv.hpp"
#include "ccsim/domain.hpp"
#include "ccsim/random.hpp"

namespace ccsim {

namespace {

constexpr std::string_view kArrivalStream = "traffic.arrivals";
constexpr std::string_view kModelStream = "traffic.models";

void require(bool ok, const std::string& message) {
  if (!ok) throw ParameterError(message);
}

void check_common(double mean_rps, TimeSpan duration) {
  require(std::isfinite(mean_rps) && mean_rps > 0.0, "mean_rps must be positive");
  require(duration > TimeSpan{}, "duration must be positive");
}

// Converts an offset in (fractional) microseconds to a tick, truncating so the
// tick never exceeds the continuous arrival time.
TimePoint to_tick(double micros) {
  return TimePoint::micros(static_cast<std::int64_t>(std::floor(micros)));
}

}  // namespace

std::string_view to_string(TrafficPattern pattern) {
  switch (pattern) {
    case TrafficPattern::Gamma: return "gamma";
    case TrafficPattern::Bursty: return "bursty";
    case TrafficPattern::Ramp: return "ramp";
  }
  return "?";
}

TrafficPattern parse_traffic_pattern(std::string_view text) {
  std::string lowered(text);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lowered == "gamma") return TrafficPattern::Gamma;
  if (lowered == "bursty") return TrafficPattern::Bursty;
  if (lowered == "ramp") return TrafficPattern::Ramp;
  throw ParameterError("unknown traffic pattern '" + std::string(text) + "'");
}

ModelMix uniform_mix(const std::vector<std::string>& models) {
  ModelMix mix;
  for (const auto& m : models) mix.push_back({m, 1.0 / static_cast<double>(models.size())});
  return mix;
}

void TrafficSpec::validate() const {
  check_common(mean_rps, duration);
  switch (pattern) {
    case TrafficPattern::Gamma:
      require(params.gamma_shape > 0.0, "gamma_shape must be positive");
      break;
    case TrafficPattern::Bursty:
      require(params.burst_duty > 0.0 && params.burst_duty <= 1.0, "burst_duty must be in (0, 1]");
      require(params.burst_period > TimeSpan{} && params.burst_period <= duration,
              "burst_period must be in (0, duration]");
      break;
    case TrafficPattern::Ramp:
      require(params.ramp_peak_fraction > 0.0 && params.ramp_peak_fraction < 1.0,
              "ramp_peak_fraction must be in (0, 1)");
      break;
  }
  require(!model_mix.empty(), "model_mix must not be empty");
  double total = 0.0;
  for (const auto& entry : model_mix) {
    require(entry.weight >= 0.0, "model_mix weight for '" + entry.model + "' is negative");
    total += entry.weight;
  }
  require(std::abs(total - 1.0) <= 1e-9, "model_mix weights must sum to 1");
}

ArrivalTrace gen_gamma(double mean_rps, TimeSpan duration, double shape, std::uint64_t seed) {
  check_common(mean_rps, duration);
  require(std::isfinite(shape) && shape > 0.0, "gamma shape must be positive");

  ArrivalTrace trace{.arrivals = {}, .duration = duration, .seed = seed};
  Rng rng(seed, kArrivalStream);
  const double scale_us = 1e6 / (mean_rps * shape);
  const double end_us = static_cast<double>(duration.count());
  double t = 0.0;
  for (;;) {
    t += rng.gamma(shape, scale_us);
    if (t >= end_us) break;
    trace.arrivals.push_back({to_tick(t), {}});
  }
  return trace;
}

ArrivalTrace gen_bursty(double mean_rps, TimeSpan duration, TimeSpan period, double duty,
                        std::uint64_t seed) {
  check_common(mean_rps, duration);
  require(duty > 0.0 && duty <= 1.0, "burst duty must be in (0, 1]");
  require(period > TimeSpan{} && period <= duration, "burst period must be in (0, duration]");

  ArrivalTrace trace{.arrivals = {}, .duration = duration, .seed = seed};
  Rng rng(seed, kArrivalStream);
  const double burst_rate_per_us = mean_rps / duty * 1e-6;
  const auto burst_len =
      static_cast<std::int64_t>(std::llround(static_cast<double>(period.count()) * duty));
  for (std::int64_t window = 0; window < duration.count(); window += period.count()) {
    const std::int64_t burst_end = std::min(window + burst_len, duration.count());
    double t = static_cast<double>(window);
    for (;;) {
      t += rng.exponential(burst_rate_per_us);
      const TimePoint tick = to_tick(t);
      if (tick.count() >= burst_end) break;
      trace.arrivals.push_back({tick, {}});
    }
  }
  return trace;
}

double ramp_rate(double mean_rps, TimeSpan duration, double peak_fraction, TimePoint t) {
  const double total = static_cast<double>(duration.count());
  const double peak_at = peak_fraction * total;
  const double x = static_cast<double>(t.count());
  const double peak_rate = 2.0 * mean_rps;
  if (x < 0.0 || x >= total) return 0.0;
  if (x <= peak_at) return peak_rate * x / peak_at;
  return peak_rate * (total - x) / (total - peak_at);
}

ArrivalTrace gen_ramp(double mean_rps, TimeSpan duration, double peak_fraction, std::uint64_t seed) {
  check_common(mean_rps, duration);
  require(peak_fraction > 0.0 && peak_fraction < 1.0, "ramp peak fraction must be in (0, 1)");

  ArrivalTrace trace{.arrivals = {}, .duration = duration, .seed = seed};
  Rng rng(seed, kArrivalStream);
  const double peak_rate = 2.0 * mean_rps;
  const double peak_rate_per_us = peak_rate * 1e-6;
  const double end_us = static_cast<double>(duration.count());
  const double peak_at = peak_fraction * end_us;
  double t = 0.0;
  for (;;) {
    t += rng.exponential(peak_rate_per_us);
    if (t >= end_us) break;
    const double rate = t <= peak_at ? peak_rate * t / peak_at
                                     : peak_rate * (end_us - t) / (end_us - peak_at);
    if (rng.uniform() * peak_rate < rate) trace.arrivals.push_back({to_tick(t), {}});
  }
  return trace;
}

ArrivalTrace assign_models(ArrivalTrace trace, const ModelMix& mix, std::uint64_t seed) {
  require(!mix.empty(), "model mix must not be empty");
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& entry : mix) {
    require(entry.weight >= 0.0, "model mix weight for '" + entry.model + "' is negative");
    total += entry.weight;
    cumulative.push_back(total);
  }
  require(total > 0.0, "model mix weights must not all be zero");

  Rng rng(seed, kModelStream);
  for (auto& a : trace.arrivals) {
    const double u = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    a.model = mix[static_cast<std::size_t>(it - cumulative.begin())].model;
  }
  return trace;
}

ArrivalTrace generate_trace(const TrafficSpec& spec, std::uint64_t seed) {
  spec.validate();
  ArrivalTrace trace;
  switch (spec.pattern) {
    case TrafficPattern::Gamma:
      trace = gen_gamma(spec.mean_rps, spec.duration, spec.params.gamma_shape, seed);
      break;
    case TrafficPattern::Bursty:
      trace = gen_bursty(spec.mean_rps, spec.duration, spec.params.burst_period,
                         spec.params.burst_duty, seed);
      break;
    case TrafficPattern::Ramp:
      trace = gen_ramp(spec.mean_rps, spec.duration, spec.params.ramp_peak_fraction, seed);
      break;
  }
  return assign_models(std::move(trace), spec.model_mix, seed);
}

double realized_mean(const ArrivalTrace& trace) {
  if (trace.empty() || trace.duration <= TimeSpan{}) return 0.0;
  return static_cast<double>(trace.size()) / trace.duration.to_seconds();
}

void write_trace_csv(const ArrivalTrace& trace, std::ostream& out) {
  out << "arrival_s,model\n";
  for (const auto& a : trace.arrivals) out << format_seconds(a.arrival) << ',' << a.model << '\n';
}

ArrivalTrace read_trace_csv(std::istream& in, TimeSpan duration) {
  ArrivalTrace trace{.arrivals = {}, .duration = duration, .seed = 0};
  const auto table = read_csv(in, {"arrival_s", "model"});
  TimePoint previous;
  for (std::size_t row = 0; row < table.rows.size(); ++row) {
    const auto& cells = table.rows[row];
    const std::string where = "trace row " + std::to_string(row + 1);
    TimePoint at;
    try {
      at = TimePoint::micros(parse_seconds(cells[0]));
    } catch (const std::invalid_argument&) {
      throw SchemaError(where + ": bad arrival_s '" + cells[0] + "'");
    }
    if (at < previous) throw SchemaError(where + ": arrivals must be sorted");
    if (at.count() < 0) throw SchemaError(where + ": negative arrival");
    if (cells[1].empty()) throw SchemaError(where + ": empty model");
    trace.arrivals.push_back({at, cells[1]});
    previous = at;
  }
  return trace;
}

}  // namespace ccsim
