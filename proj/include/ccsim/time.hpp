#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace ccsim {

/// Non-negative duration in integer microseconds.
///
/// The underlying tick count is signed so intermediate arithmetic (e.g. an SLA
/// minus estimates) can dip below zero before being clamped by the caller.
class TimeSpan {
 public:
  constexpr TimeSpan() = default;

  static constexpr TimeSpan micros(std::int64_t us) { return TimeSpan{us}; }
  static constexpr TimeSpan millis(std::int64_t ms) { return TimeSpan{ms * 1000}; }
  static constexpr TimeSpan whole_seconds(std::int64_t s) { return TimeSpan{s * 1'000'000}; }
  /// Rounds to the nearest microsecond.
  static TimeSpan seconds(double s);

  constexpr std::int64_t count() const { return us_; }
  constexpr double to_seconds() const { return static_cast<double>(us_) * 1e-6; }
  constexpr bool is_zero() const { return us_ == 0; }

  constexpr TimeSpan& operator+=(TimeSpan o) { us_ += o.us_; return *this; }
  constexpr TimeSpan& operator-=(TimeSpan o) { us_ -= o.us_; return *this; }
  friend constexpr TimeSpan operator+(TimeSpan a, TimeSpan b) { return TimeSpan{a.us_ + b.us_}; }
  friend constexpr TimeSpan operator-(TimeSpan a, TimeSpan b) { return TimeSpan{a.us_ - b.us_}; }
  friend constexpr auto operator<=>(TimeSpan, TimeSpan) = default;

 private:
  constexpr explicit TimeSpan(std::int64_t us) : us_(us) {}
  std::int64_t us_ = 0;
};

/// Instant on the virtual clock, in microseconds since run start.
class TimePoint {
 public:
  constexpr TimePoint() = default;

  static constexpr TimePoint micros(std::int64_t us) { return TimePoint{us}; }
  static constexpr TimePoint whole_seconds(std::int64_t s) { return TimePoint{s * 1'000'000}; }
  static TimePoint seconds(double s);
  static constexpr TimePoint origin() { return TimePoint{0}; }

  constexpr std::int64_t count() const { return us_; }
  constexpr double to_seconds() const { return static_cast<double>(us_) * 1e-6; }
  constexpr TimeSpan since_origin() const { return TimeSpan::micros(us_); }

  constexpr TimePoint& operator+=(TimeSpan d) { us_ += d.count(); return *this; }
  friend constexpr TimePoint operator+(TimePoint t, TimeSpan d) { return TimePoint{t.us_ + d.count()}; }
  friend constexpr TimePoint operator-(TimePoint t, TimeSpan d) { return TimePoint{t.us_ - d.count()}; }
  friend constexpr TimeSpan operator-(TimePoint a, TimePoint b) { return TimeSpan::micros(a.us_ - b.us_); }
  friend constexpr auto operator<=>(TimePoint, TimePoint) = default;

 private:
  constexpr explicit TimePoint(std::int64_t us) : us_(us) {}
  std::int64_t us_ = 0;
};

constexpr TimePoint max(TimePoint a, TimePoint b) { return a < b ? b : a; }
constexpr TimePoint min(TimePoint a, TimePoint b) { return a < b ? a : b; }
constexpr TimeSpan max(TimeSpan a, TimeSpan b) { return a < b ? b : a; }

/// Renders microseconds as seconds with exactly six decimals ("12.000340").
/// Pure integer formatting, so the text is identical on every platform.
std::string format_seconds(std::int64_t micros);
inline std::string format_seconds(TimeSpan d) { return format_seconds(d.count()); }
inline std::string format_seconds(TimePoint t) { return format_seconds(t.count()); }

/// Parses a decimal seconds string ("1.5", "12.000340") into microseconds.
/// Digits past the sixth decimal are rounded half-up. Throws std::invalid_argument.
std::int64_t parse_seconds(const std::string& text);

}  // namespace ccsim
