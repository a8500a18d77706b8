#include "newsrace/chrono.hpp"

#include <array>
#include <cctype>
#include <cstdio>
#include <cstdlib>

namespace newsrace {

double delta_minutes(TimeMs t_news, TimeMs t_x) {
  return static_cast<double>(t_news - t_x) / static_cast<double>(kMsPerMinute);
}

// Howard Hinnant's civil-days algorithm; exact over the proleptic calendar.
std::int64_t days_from_civil(const Date& d) {
  std::int64_t y = d.year;
  const int m = d.month;
  const int day = d.day;
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m > 2 ? m - 3 : m + 9) + 2) / 5 + day - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

Date civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned day = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m),
              static_cast<int>(day)};
}

TimeMs midnight_ms(const Date& d) { return days_from_civil(d) * kMsPerDay; }

Date date_of_ms(TimeMs ms) {
  std::int64_t days = ms / kMsPerDay;
  if (ms < 0 && ms % kMsPerDay != 0) --days;
  return civil_from_days(days);
}

bool is_valid_date(const Date& d) {
  if (d.month < 1 || d.month > 12 || d.day < 1) return false;
  static constexpr std::array<int, 12> kLen = {31, 28, 31, 30, 31, 30,
                                               31, 31, 30, 31, 30, 31};
  int len = kLen[static_cast<size_t>(d.month - 1)];
  const bool leap =
      (d.year % 4 == 0 && d.year % 100 != 0) || d.year % 400 == 0;
  if (d.month == 2 && leap) len = 29;
  return d.day <= len;
}

namespace {

bool all_digits(const std::string& s, size_t from, size_t to) {
  if (to > s.size()) return false;
  for (size_t i = from; i < to; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return from < to;
}

int to_int(const std::string& s, size_t from, size_t to) {
  int v = 0;
  for (size_t i = from; i < to; ++i) v = v * 10 + (s[i] - '0');
  return v;
}

}  // namespace

std::optional<Date> parse_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  if (!all_digits(s, 0, 4) || !all_digits(s, 5, 7) || !all_digits(s, 8, 10)) {
    return std::nullopt;
  }
  Date d{to_int(s, 0, 4), to_int(s, 5, 7), to_int(s, 8, 10)};
  if (!is_valid_date(d)) return std::nullopt;
  return d;
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

std::optional<TimeMs> parse_instant(const std::string& s) {
  if (s.size() == 10) {
    auto d = parse_date(s);
    if (!d) return std::nullopt;
    return midnight_ms(*d);
  }
  // YYYY-MM-DDTHH:MM:SS[.mmm]Z
  if (s.size() != 20 && s.size() != 24) return std::nullopt;
  if (s[10] != 'T' || s[13] != ':' || s[16] != ':' || s.back() != 'Z') {
    return std::nullopt;
  }
  auto d = parse_date(s.substr(0, 10));
  if (!d) return std::nullopt;
  if (!all_digits(s, 11, 13) || !all_digits(s, 14, 16) ||
      !all_digits(s, 17, 19)) {
    return std::nullopt;
  }
  const int hh = to_int(s, 11, 13);
  const int mm = to_int(s, 14, 16);
  const int ss = to_int(s, 17, 19);
  if (hh > 23 || mm > 59 || ss > 59) return std::nullopt;
  int ms = 0;
  if (s.size() == 24) {
    if (s[19] != '.' || !all_digits(s, 20, 23)) return std::nullopt;
    ms = to_int(s, 20, 23);
  }
  return midnight_ms(*d) + hh * kMsPerHour + mm * kMsPerMinute +
         ss * kMsPerSecond + ms;
}

std::string format_instant(TimeMs ms) {
  std::int64_t days = ms / kMsPerDay;
  TimeMs rem = ms % kMsPerDay;
  if (rem < 0) {
    rem += kMsPerDay;
    --days;
  }
  const Date d = civil_from_days(days);
  const int hh = static_cast<int>(rem / kMsPerHour);
  const int mm = static_cast<int>(rem % kMsPerHour / kMsPerMinute);
  const int ss = static_cast<int>(rem % kMsPerMinute / kMsPerSecond);
  const int mmm = static_cast<int>(rem % kMsPerSecond);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ",
                d.year, d.month, d.day, hh, mm, ss, mmm);
  return buf;
}

std::optional<TimeMs> parse_duration_ms(const std::string& s) {
  if (s.empty()) return std::nullopt;
  size_t i = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i == 0) return std::nullopt;
  const std::int64_t n = std::strtoll(s.substr(0, i).c_str(), nullptr, 10);
  const std::string unit = s.substr(i);
  if (unit.empty() || unit == "s") return n * kMsPerSecond;
  if (unit == "ms") return n;
  if (unit == "m") return n * kMsPerMinute;
  if (unit == "h") return n * kMsPerHour;
  if (unit == "d") return n * kMsPerDay;
  return std::nullopt;
}

}  // namespace newsrace
