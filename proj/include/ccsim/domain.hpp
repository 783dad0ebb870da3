#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ccsim/time.hpp"

namespace ccsim {

/// Invalid numeric parameter (rates, shapes, batch sizes...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent input document. The message carries a field path.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Run configuration that cannot be satisfied (unknown model, missing file...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Broken internal invariant (a simulator bug). Always checked, never compiled out.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void check_invariant(bool ok, const char* what) {
  if (!ok) throw InvariantViolation(what);
}

enum class ExecMode { CC, NoCC };

std::string_view to_string(ExecMode mode);
/// Accepts "cc" / "nocc" (case-insensitive, "no-cc" and "no_cc" too).
ExecMode parse_exec_mode(std::string_view text);

struct ModelId {
  std::string name;
  double size_gb = 0.0;

  friend bool operator==(const ModelId& a, const ModelId& b) { return a.name == b.name; }
};

using RequestId = std::uint64_t;
using BatchId = std::uint64_t;

struct Request {
  RequestId id = 0;
  std::string model;
  TimePoint arrival;
  std::optional<TimePoint> dispatch;
  std::optional<TimePoint> completion;
  std::optional<BatchId> batch_id;

  bool completed() const { return completion.has_value(); }
};

class SlaPolicy {
 public:
  explicit SlaPolicy(TimeSpan limit);
  static SlaPolicy seconds(double s) { return SlaPolicy{TimeSpan::seconds(s)}; }

  TimeSpan limit() const { return limit_; }

 private:
  TimeSpan limit_;
};

/// completion - arrival, or nullopt for a request that never completed.
std::optional<TimeSpan> latency_of(const Request& request);

/// Inclusive: a latency equal to the limit meets the SLA.
bool meets_sla(const Request& request, const SlaPolicy& sla);

}  // namespace ccsim
