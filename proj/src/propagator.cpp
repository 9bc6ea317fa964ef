#include "specorb/propagator.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace specorb {

GravityConstants gravity_constants(GravityModel model) {
  GravityConstants g{};
  if (model == GravityModel::wgs72) {
    g.mu = 398600.8;
    g.radiusearthkm = 6378.135;
    g.j2 = 0.001082616;
    g.j3 = -0.00000253881;
    g.j4 = -0.00000165597;
  } else {
    g.mu = 398600.5;
    g.radiusearthkm = 6378.137;
    g.j2 = 0.00108262998905;
    g.j3 = -0.00000253215306;
    g.j4 = -0.00000161098761;
  }
  g.xke = 60.0 / std::sqrt(g.radiusearthkm * g.radiusearthkm * g.radiusearthkm / g.mu);
  g.tumin = 1.0 / g.xke;
  g.j3oj2 = g.j3 / g.j2;
  return g;
}

const char* describe(Sgp4Status s) {
  switch (s) {
    case Sgp4Status::ok: return "ok";
    case Sgp4Status::mean_elements: return "mean eccentricity out of range";
    case Sgp4Status::mean_motion: return "mean motion non-positive";
    case Sgp4Status::perturbed_elements: return "perturbed eccentricity out of range";
    case Sgp4Status::semi_latus_rectum: return "semi-latus rectum negative";
    case Sgp4Status::suborbital: return "epoch elements are sub-orbital";
    case Sgp4Status::decayed: return "satellite has decayed";
    case Sgp4Status::deep_space: return "deep-space orbit not supported";
    case Sgp4Status::kepler: return "Kepler iteration did not converge";
  }
  return "unknown";
}

const char* element_name(ElementId id) {
  switch (id) {
    case ElementId::inclination: return "inclination";
    case ElementId::raan: return "raan";
    case ElementId::eccentricity: return "eccentricity";
    case ElementId::arg_perigee: return "arg_perigee";
    case ElementId::mean_anomaly: return "mean_anomaly";
    case ElementId::mean_motion: return "mean_motion";
  }
  return "?";
}

ElementId element_from_name(const std::string& name) {
  for (ElementId id : kAllElements)
    if (name == element_name(id)) return id;
  if (name == "i") return ElementId::inclination;
  if (name == "M") return ElementId::mean_anomaly;
  if (name == "e") return ElementId::eccentricity;
  throw ConfigError("unknown orbital element '" + name + "'");
}

MeanElements<double> elements_from_tle(const Tle& tle) {
  MeanElements<double> e;
  e.epoch = tle.epoch;
  e.inclination = tle.inclination * (std::numbers::pi / 180.0);
  e.raan = tle.raan * (std::numbers::pi / 180.0);
  e.eccentricity = tle.eccentricity;
  e.arg_perigee = tle.arg_perigee * (std::numbers::pi / 180.0);
  e.mean_anomaly = tle.mean_anomaly * (std::numbers::pi / 180.0);
  e.mean_motion = tle.mean_motion / kXpdotp;
  e.bstar = tle.bstar;
  e.ndot = tle.mean_motion_dot / (kXpdotp * kMinutesPerDay);
  e.nddot = tle.mean_motion_ddot / (kXpdotp * kMinutesPerDay * kMinutesPerDay);
  return e;
}

Tle tle_from_elements(const Tle& base, const MeanElements<double>& e) {
  constexpr double r2d = 180.0 / std::numbers::pi;
  Tle out = base;
  out.inclination = e.inclination * r2d;
  out.raan = wrap_degrees(e.raan * r2d);
  out.eccentricity = e.eccentricity;
  out.arg_perigee = wrap_degrees(e.arg_perigee * r2d);
  out.mean_anomaly = wrap_degrees(e.mean_anomaly * r2d);
  out.mean_motion = e.mean_motion * kXpdotp;
  return out;
}

double semi_major_axis(const Tle& tle, double mu) {
  const double period_s = 86400.0 / tle.mean_motion;
  const double x = period_s / (2.0 * std::numbers::pi);
  return std::cbrt(mu * x * x);
}

void write_ephemeris_csv(std::ostream& out, std::span<const StateVector<double>> states) {
  out << "t_min,x_km,y_km,z_km,vx,vy,vz\n";
  char buf[256];
  for (const auto& s : states) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", s.t_min,
                  s.position.x, s.position.y, s.position.z, s.velocity.x, s.velocity.y,
                  s.velocity.z);
    out << buf;
  }
}

std::vector<StateVector<double>> read_ephemeris_csv(std::istream& in) {
  std::vector<StateVector<double>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.rfind("t_min", 0) == 0) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    StateVector<double> s;
    if (!(ss >> s.t_min >> s.position.x >> s.position.y >> s.position.z >> s.velocity.x >>
          s.velocity.y >> s.velocity.z))
      throw ConfigError("ephemeris line " + std::to_string(lineno) + ": expected 7 numbers");
    out.push_back(s);
  }
  return out;
}

template class Sgp4Model<double>;

}  // namespace specorb
