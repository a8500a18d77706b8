#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace newsrace {

// Every timestamp in the pipeline is integer milliseconds since the Unix
// epoch, UTC. Minute values are derived at presentation time only.
using TimeMs = std::int64_t;

inline constexpr TimeMs kMsPerSecond = 1000;
inline constexpr TimeMs kMsPerMinute = 60 * kMsPerSecond;
inline constexpr TimeMs kMsPerHour = 60 * kMsPerMinute;
inline constexpr TimeMs kMsPerDay = 24 * kMsPerHour;

/// Signed X-vs-news latency in minutes: (t_news - t_x) / 60000.
/// Positive exactly when the X mention precedes the news mention.
double delta_minutes(TimeMs t_news, TimeMs t_x);

// Proleptic Gregorian calendar date, UTC.
struct Date {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31

  auto operator<=>(const Date&) const = default;
};

// Civil <-> day-count conversions (days since 1970-01-01).
std::int64_t days_from_civil(const Date& d);
Date civil_from_days(std::int64_t days);

TimeMs midnight_ms(const Date& d);
Date date_of_ms(TimeMs ms);

bool is_valid_date(const Date& d);

// "2026-04-12"
std::optional<Date> parse_date(const std::string& s);
std::string format_date(const Date& d);

// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SSZ" and "...THH:MM:SS.mmmZ".
std::optional<TimeMs> parse_instant(const std::string& s);
// Always "YYYY-MM-DDTHH:MM:SS.mmmZ", e.g. "2010-11-04T01:42:54.657Z".
std::string format_instant(TimeMs ms);

// "30m", "24h", "90s", "250ms", or a plain number of seconds.
std::optional<TimeMs> parse_duration_ms(const std::string& s);

// Inclusive [start, end] time range.
struct TimeWindow {
  TimeMs start = 0;
  TimeMs end = 0;

  bool contains(TimeMs t) const { return t >= start && t <= end; }
  bool overlaps(const TimeWindow& other) const {
    return start <= other.end && end >= other.start;
  }
};

// Inclusive calendar-date range.
struct DateWindow {
  Date from;
  Date to;

  bool contains(const Date& d) const { return d >= from && d <= to; }
  TimeWindow as_time_window() const {
    return {midnight_ms(from), midnight_ms(to) + kMsPerDay - 1};
  }
};

}  // namespace newsrace
