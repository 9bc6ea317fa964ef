#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace specorb {

/// Julian date split into an integer day and a day fraction in [0, 1).
///
/// The integer part is the Julian day number whose noon starts the day, so
/// `day + fraction` is the ordinary astronomical JD. Keeping the two parts
/// apart preserves sub-microsecond resolution over multi-day propagations.
struct JulianDate {
  std::int64_t day = 0;
  double fraction = 0.0;

  double jd() const { return static_cast<double>(day) + fraction; }

  JulianDate plus_days(double days) const;
  JulianDate plus_seconds(double seconds) const { return plus_days(seconds / 86400.0); }

  /// Days from `other` to this date.
  double days_since(const JulianDate& other) const {
    return static_cast<double>(day - other.day) + (fraction - other.fraction);
  }

  /// Builds a normalised date from an arbitrary split.
  static JulianDate normalized(std::int64_t day, double fraction);

  friend bool operator==(const JulianDate&, const JulianDate&) = default;
};

struct CalendarTime {
  int year = 2000;
  int month = 1;
  int day = 1;
  int hour = 0;
  int minute = 0;
  double second = 0.0;
};

/// Astronomical JD of a UTC calendar instant. Years outside [1957, 2100] or
/// invalid dates raise ConfigError.
JulianDate julian_day(const CalendarTime& utc);

/// Inverse of julian_day (Gregorian calendar).
CalendarTime calendar_from_jd(const JulianDate& jd);

/// Day of year (1-based) for a calendar date.
int day_of_year(int year, int month, int day);

bool is_leap_year(int year);

/// Parses `YYYY-MM-DDTHH:MM:SS[.fff][Z]`.
CalendarTime parse_utc(std::string_view text);

std::string format_utc(const CalendarTime& t);

}  // namespace specorb
