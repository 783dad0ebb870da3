#include "ccsim/domain.hpp"

#include <algorithm>
#include <cctype>

namespace ccsim {

std::string_view to_string(ExecMode mode) {
  return mode == ExecMode::CC ? "cc" : "nocc";
}

ExecMode parse_exec_mode(std::string_view text) {
  std::string lowered;
  for (char c : text) {
    if (c == '-' || c == '_') continue;
    lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (lowered == "cc") return ExecMode::CC;
  if (lowered == "nocc") return ExecMode::NoCC;
  throw ParameterError("unknown execution mode '" + std::string(text) + "' (expected cc or nocc)");
}

SlaPolicy::SlaPolicy(TimeSpan limit) : limit_(limit) {
  if (limit <= TimeSpan{}) {
    throw ParameterError("SLA limit must be positive, got " + format_seconds(limit) + " s");
  }
}

std::optional<TimeSpan> latency_of(const Request& request) {
  if (!request.completion) return std::nullopt;
  return *request.completion - request.arrival;
}

bool meets_sla(const Request& request, const SlaPolicy& sla) {
  const auto latency = latency_of(request);
  return latency && *latency <= sla.limit();
}

}  // namespace ccsim
