#include "ccsim/time.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace ccsim {

TimeSpan TimeSpan::seconds(double s) {
  return TimeSpan::micros(static_cast<std::int64_t>(std::llround(s * 1e6)));
}

TimePoint TimePoint::seconds(double s) {
  return TimePoint::micros(static_cast<std::int64_t>(std::llround(s * 1e6)));
}

std::string format_seconds(std::int64_t micros) {
  const bool negative = micros < 0;
  const std::uint64_t mag = negative ? static_cast<std::uint64_t>(-(micros + 1)) + 1
                                     : static_cast<std::uint64_t>(micros);
  std::string frac = std::to_string(mag % 1'000'000);
  frac.insert(0, 6 - frac.size(), '0');
  return (negative ? "-" : "") + std::to_string(mag / 1'000'000) + "." + frac;
}

std::int64_t parse_seconds(const std::string& text) {
  std::size_t pos = 0;
  bool negative = false;
  if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) {
    negative = text[pos] == '-';
    ++pos;
  }
  std::int64_t whole = 0;
  std::size_t digits = 0;
  while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
    whole = whole * 10 + (text[pos] - '0');
    ++pos;
    ++digits;
  }
  std::int64_t frac = 0;
  int frac_digits = 0;
  bool round_up = false;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      if (frac_digits < 6) {
        frac = frac * 10 + (text[pos] - '0');
        ++frac_digits;
      } else if (frac_digits == 6) {
        round_up = text[pos] >= '5';
        ++frac_digits;
      }
      ++pos;
      ++digits;
    }
  }
  if (digits == 0 || pos != text.size()) {
    throw std::invalid_argument("not a decimal seconds value: '" + text + "'");
  }
  for (int i = std::min(frac_digits, 6); i < 6; ++i) frac *= 10;
  std::int64_t us = whole * 1'000'000 + frac + (round_up ? 1 : 0);
  return negative ? -us : us;
}

}  // namespace ccsim
