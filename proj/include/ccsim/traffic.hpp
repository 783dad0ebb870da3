#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ccsim/time.hpp"

namespace ccsim {

enum class TrafficPattern { Gamma, Bursty, Ramp };

std::string_view to_string(TrafficPattern pattern);
TrafficPattern parse_traffic_pattern(std::string_view text);

struct TrafficParams {
  double gamma_shape = 0.5;
  TimeSpan burst_period = TimeSpan::whole_seconds(120);
  double burst_duty = 0.25;
  double ramp_peak_fraction = 0.5;
};

struct MixEntry {
  std::string model;
  double weight = 0.0;
};
using ModelMix = std::vector<MixEntry>;

/// Equal weights over the given model names.
ModelMix uniform_mix(const std::vector<std::string>& models);

struct TrafficSpec {
  TrafficPattern pattern = TrafficPattern::Gamma;
  double mean_rps = 4.0;
  TimeSpan duration = TimeSpan::whole_seconds(1200);
  TrafficParams params;
  ModelMix model_mix;

  /// Throws ParameterError on the first violated constraint.
  void validate() const;
};

struct Arrival {
  TimePoint arrival;
  std::string model;

  friend bool operator==(const Arrival&, const Arrival&) = default;
};

struct ArrivalTrace {
  std::vector<Arrival> arrivals;
  TimeSpan duration;
  std::uint64_t seed = 0;

  std::size_t size() const { return arrivals.size(); }
  bool empty() const { return arrivals.empty(); }
};

/// Gamma-distributed inter-arrival gaps with shape k and scale 1/(mean_rps*k).
ArrivalTrace gen_gamma(double mean_rps, TimeSpan duration, double shape, std::uint64_t seed);

/// Poisson at mean_rps/duty during the first duty*period of every period window,
/// silent for the rest of the window.
ArrivalTrace gen_bursty(double mean_rps, TimeSpan duration, TimeSpan period, double duty,
                        std::uint64_t seed);

/// Inhomogeneous Poisson with a triangular rate peaking at 2*mean_rps at
/// peak_fraction*duration; sampled by thinning.
ArrivalTrace gen_ramp(double mean_rps, TimeSpan duration, double peak_fraction, std::uint64_t seed);

/// Triangular ramp intensity (requests/second) at offset t.
double ramp_rate(double mean_rps, TimeSpan duration, double peak_fraction, TimePoint t);

/// Tags every arrival independently with a model drawn from the mix.
ArrivalTrace assign_models(ArrivalTrace trace, const ModelMix& mix, std::uint64_t seed);

/// Pattern dispatch followed by model assignment; each step draws from its own sub-stream.
ArrivalTrace generate_trace(const TrafficSpec& spec, std::uint64_t seed);

/// Arrivals per second of trace duration; 0 for an empty trace.
double realized_mean(const ArrivalTrace& trace);

/// CSV with header `arrival_s,model`, one row per arrival in order.
void write_trace_csv(const ArrivalTrace& trace, std::ostream& out);
ArrivalTrace read_trace_csv(std::istream& in, TimeSpan duration);

}  // namespace ccsim
