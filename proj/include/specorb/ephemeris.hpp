#pragma once

// Time systems, solar geometry, eclipse test and target-centred frames.

#include <cmath>
#include <numbers>

#include "specorb/autodiff.hpp"
#include "specorb/errors.hpp"
#include "specorb/time.hpp"
#include "specorb/vec3.hpp"

namespace specorb {

inline constexpr double kEarthEquatorialRadiusKm = 6378.137;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

/// Greenwich mean sidereal time (IAU-82) in [0, 2pi) at `base + offset_days`.
template <Scalar T>
T gmst(const JulianDate& base, const T& offset_days) {
  using std::fmod;
  const double whole = static_cast<double>(base.day - 2451545);
  const T tut1 = (T(whole) + (T(base.fraction) + offset_days)) / 36525.0;
  T secs = -6.2e-6 * tut1 * tut1 * tut1 + 0.093104 * tut1 * tut1 +
           (876600.0 * 3600.0 + 8640184.812866) * tut1 + T(67310.54841);
  T theta = fmod(secs * (kDegToRad / 240.0), kTwoPi);
  if (value_of(theta) < 0.0) theta = theta + kTwoPi;
  return theta;
}

inline double gmst(const JulianDate& jd) { return gmst(jd, 0.0); }

template <Scalar T>
struct SunState {
  Vec3<T> direction_teme;  // unit vector from Earth toward the Sun
  T subsolar_lat_deg{};
  T subsolar_lon_deg{};
};

/// Solar declination (rad) from the day angle, low-order Fourier series.
template <Scalar T>
T solar_declination(const T& gamma) {
  using std::cos;
  using std::sin;
  return 0.006918 - 0.399912 * cos(gamma) + 0.070257 * sin(gamma) - 0.006758 * cos(2.0 * gamma) +
         0.000907 * sin(2.0 * gamma) - 0.002697 * cos(3.0 * gamma) + 0.00148 * sin(3.0 * gamma);
}

/// Equation of time in minutes (apparent minus mean solar time).
template <Scalar T>
T equation_of_time_minutes(const T& gamma) {
  using std::cos;
  using std::sin;
  return 229.18 * (0.000075 + 0.001868 * cos(gamma) - 0.032077 * sin(gamma) -
                   0.014615 * cos(2.0 * gamma) - 0.040849 * sin(2.0 * gamma));
}

/// Sun direction from the subsolar point at `base + offset_days`.
///
/// Calendar bookkeeping (year, day of year) is decided on the primal date;
/// everything downstream is a smooth function of the offset.
template <Scalar T>
SunState<T> sun_direction(const JulianDate& base, const T& offset_days) {
  using std::cos;
  using std::sin;
  const JulianDate primal = base.plus_days(value_of(offset_days));
  const CalendarTime cal = calendar_from_jd(primal);
  const int doy = day_of_year(cal.year, cal.month, cal.day);
  // Midnight that starts the UTC date, as an exact half-day offset from base.day.
  const JulianDate midnight = julian_day(CalendarTime{cal.year, cal.month, cal.day, 0, 0, 0.0});
  const double base_to_midnight = static_cast<double>(midnight.day - base.day) + midnight.fraction;
  const T utc_hours = 24.0 * ((T(base.fraction) + offset_days) - base_to_midnight);

  const T gamma = (kTwoPi / 365.0) * (static_cast<double>(doy - 1) + (utc_hours - 12.0) / 24.0);
  const T decl = solar_declination(gamma);
  const T eot = equation_of_time_minutes(gamma);
  const T lon_deg = 180.0 - 15.0 * (utc_hours + eot / 60.0);
  const T lon = lon_deg * kDegToRad;

  const Vec3<T> ecef{cos(decl) * cos(lon), cos(decl) * sin(lon), sin(decl)};
  const T theta = gmst(base, offset_days);
  const T ct = cos(theta), st = sin(theta);
  const Vec3<T> teme{ct * ecef.x - st * ecef.y, st * ecef.x + ct * ecef.y, ecef.z};

  SunState<T> s;
  s.direction_teme = normalized(teme);
  s.subsolar_lat_deg = decl * kRadToDeg;
  T wrapped = lon_deg;
  const double w = std::floor((value_of(lon_deg) + 180.0) / 360.0);
  wrapped = wrapped - 360.0 * w;
  s.subsolar_lon_deg = wrapped;
  return s;
}

inline SunState<double> sun_direction(const JulianDate& jd) { return sun_direction(jd, 0.0); }

/// Cylindrical umbra: behind the Earth and inside its shadow cylinder.
bool is_eclipsed(const Vec3d& r_sat_km, const Vec3d& sun_dir);

/// TEME to RTN rotation; rows are the radial, along-track and cross-track axes.
template <Scalar T>
Mat3<T> rtn_frame(const Vec3<T>& r, const Vec3<T>& v) {
  const double rn = value_of(norm(r));
  const double vn = value_of(norm(v));
  const Vec3<T> h = cross(r, v);
  const double hn = value_of(norm(h));
  if (rn == 0.0 || vn == 0.0 || hn <= 1e-12 * rn * vn)
    throw NumericError("degenerate RTN frame: position parallel to velocity");
  Mat3<T> q;
  q.rows[0] = r / norm(r);
  q.rows[2] = h / norm(h);
  q.rows[1] = cross(q.rows[2], q.rows[0]);
  return q;
}

/// Chaser position relative to the target in the target RTN frame, metres.
template <Scalar T>
Vec3<T> relative_position(const Vec3<T>& r_chaser_km, const Vec3d& r_target_km,
                          const Vec3d& v_target_kms) {
  const Mat3d q = rtn_frame(r_target_km, v_target_kms);
  const Vec3<T> d = r_chaser_km - lift<T>(r_target_km);
  Vec3<T> out;
  for (int i = 0; i < 3; ++i) {
    const Vec3d& row = q.rows[i];
    out[i] = 1000.0 * (row.x * d.x + row.y * d.y + row.z * d.z);
  }
  return out;
}

}  // namespace specorb
