#include "specorb/time.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "specorb/errors.hpp"

namespace specorb {

JulianDate JulianDate::normalized(std::int64_t day, double fraction) {
  const double whole = std::floor(fraction);
  JulianDate r;
  r.day = day + static_cast<std::int64_t>(whole);
  r.fraction = fraction - whole;
  if (r.fraction >= 1.0) {
    r.day += 1;
    r.fraction = 0.0;
  }
  return r;
}

JulianDate JulianDate::plus_days(double days) const {
  const double whole = std::trunc(days);
  return normalized(day + static_cast<std::int64_t>(whole), fraction + (days - whole));
}

bool is_leap_year(int year) {
  return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

namespace {

int days_in_month(int year, int month) {
  static constexpr int kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2 && is_leap_year(year)) return 29;
  return kDays[month - 1];
}

// Fliegel & Van Flandern: Julian day number of the noon that starts the date.
std::int64_t day_number(int y, int m, int d) {
  const std::int64_t a = (m - 14) / 12;
  return (1461 * (y + 4800 + a)) / 4 + (367 * (m - 2 - 12 * a)) / 12 -
         (3 * ((y + 4900 + a) / 100)) / 4 + d - 32075;
}

}  // namespace

int day_of_year(int year, int month, int day) {
  int doy = day;
  for (int m = 1; m < month; ++m) doy += days_in_month(year, m);
  return doy;
}

JulianDate julian_day(const CalendarTime& t) {
  if (t.year < 1957 || t.year > 2100) throw ConfigError("julian_day: year out of range");
  if (t.month < 1 || t.month > 12) throw ConfigError("julian_day: invalid month");
  if (t.day < 1 || t.day > days_in_month(t.year, t.month))
    throw ConfigError("julian_day: invalid day");
  if (t.hour < 0 || t.hour > 23 || t.minute < 0 || t.minute > 59 || t.second < 0.0 ||
      t.second >= 61.0)
    throw ConfigError("julian_day: invalid time of day");
  const std::int64_t jdn = day_number(t.year, t.month, t.day);
  const double day_frac = (t.hour * 3600.0 + t.minute * 60.0 + t.second) / 86400.0;
  // Midnight of the date is jdn - 0.5.
  return JulianDate::normalized(jdn - 1, 0.5 + day_frac);
}

CalendarTime calendar_from_jd(const JulianDate& jd) {
  // Shift to a midnight-based day count first.
  JulianDate m = JulianDate::normalized(jd.day, jd.fraction + 0.5);
  std::int64_t l = m.day + 68569;
  const std::int64_t n = (4 * l) / 146097;
  l = l - (146097 * n + 3) / 4;
  const std::int64_t i = (4000 * (l + 1)) / 1461001;
  l = l - (1461 * i) / 4 + 31;
  const std::int64_t j = (80 * l) / 2447;
  const std::int64_t day = l - (2447 * j) / 80;
  l = j / 11;
  const std::int64_t month = j + 2 - 12 * l;
  const std::int64_t year = 100 * (n - 49) + i + l;

  CalendarTime t;
  t.year = static_cast<int>(year);
  t.month = static_cast<int>(month);
  t.day = static_cast<int>(day);
  double secs = m.fraction * 86400.0;
  t.hour = static_cast<int>(secs / 3600.0);
  secs -= t.hour * 3600.0;
  t.minute = static_cast<int>(secs / 60.0);
  t.second = secs - t.minute * 60.0;
  return t;
}

CalendarTime parse_utc(std::string_view text) {
  std::string s(text);
  if (!s.empty() && (s.back() == 'Z' || s.back() == 'z')) s.pop_back();
  CalendarTime t;
  char sep = 0;
  int consumed = 0;
  const int n = std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d:%2d:%lf%n", &t.year, &t.month, &t.day,
                            &sep, &t.hour, &t.minute, &t.second, &consumed);
  if (n != 7 || (sep != 'T' && sep != ' ') || consumed != static_cast<int>(s.size()))
    throw ConfigError("invalid UTC timestamp: " + std::string(text));
  julian_day(t);  // validates ranges
  return t;
}

std::string format_utc(const CalendarTime& t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%09.6fZ", t.year, t.month, t.day,
                t.hour, t.minute, t.second);
  return buf;
}

}  // namespace specorb
