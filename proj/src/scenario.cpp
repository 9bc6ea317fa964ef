#include "specorb/scenario.hpp"

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "specorb/errors.hpp"

namespace specorb {

namespace {

void vertex(std::ostream& os, double x, double y, double z) { os << "v " << x << ' ' << y << ' ' << z << '\n'; }

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + p.string() + "'");
  out << text;
}

}  // namespace

std::string panel_satellite_obj(const PanelSatelliteShape& s) {
  std::ostringstream os;
  os.precision(12);
  os << "# panel satellite: bus cube and two solar array wings\n";
  const double h = 0.5 * s.bus_size;
  os << "o bus\nusemtl bus\n";
  for (int k = 0; k < 8; ++k) vertex(os, (k & 1) ? h : -h, (k & 2) ? h : -h, (k & 4) ? h : -h);
  // 1-based corner index = 1 + (x?1) + (y?2) + (z?4)
  os << "f 1 3 4 2\nf 5 6 8 7\n"   // -z, +z
     << "f 1 2 6 5\nf 3 7 8 4\n"   // -y, +y
     << "f 1 5 7 3\nf 2 4 8 6\n";  // -x, +x

  const double t = s.array_tilt_deg * std::numbers::pi / 180.0;
  // in-plane width direction, perpendicular to z and to the normal (cos t, -sin t, 0)
  const double wx = std::sin(t), wy = std::cos(t);
  const double hw = 0.5 * s.array_width;
  os << "o arrays\nusemtl solar_array\n";
  int base = 9;
  for (int side : {1, -1}) {
    const double z0 = side * (h + s.array_gap), z1 = side * (h + s.array_gap + s.array_length);
    vertex(os, -hw * wx, -hw * wy, z0);
    vertex(os, hw * wx, hw * wy, z0);
    vertex(os, hw * wx, hw * wy, z1);
    vertex(os, -hw * wx, -hw * wy, z1);
    if (side > 0)
      os << "f " << base << ' ' << base + 1 << ' ' << base + 2 << ' ' << base + 3 << '\n';
    else
      os << "f " << base << ' ' << base + 3 << ' ' << base + 2 << ' ' << base + 1 << '\n';
    base += 4;
  }
  return os.str();
}

Tle default_target_tle() {
  Tle t;
  t.name = "INSPECTION TARGET";
  t.catalog_number = "90001";
  t.classification = 'U';
  t.intl_designator = "24901A";
  t.epoch_year = 24;
  t.epoch_day = 308.5;
  t.epoch = julian_day(CalendarTime{2024, 11, 3, 12, 0, 0.0});
  t.mean_motion_dot = 0.0000125;
  t.mean_motion_ddot = 0.0;
  t.bstar = 0.000035;
  t.ephemeris_type = 0;
  t.element_set_no = 999;
  t.inclination = 28.47;
  t.raan = 310.0;
  t.eccentricity = 0.00025;
  t.arg_perigee = 90.0;
  t.mean_anomaly = 300.0;
  t.mean_motion = 15.2;
  t.rev_at_epoch = 1000;
  return t;
}

std::string default_config_json() {
  return R"({
  "target_tle": "target.tle",
  "mesh": "panel_satellite.obj",
  "gravity": "wgs72",
  "inspection": {
    "duration_s": 0,
    "snapshots": 16,
    "distance_m": 500
  },
  "weights": {
    "lambda_S": 1.0,
    "alpha": 2.0,
    "distance_cost_convention": "norm"
  },
  "optimizer": {
    "lr": 4e-6,
    "iterations": 200,
    "decision_variables": ["inclination", "mean_anomaly", "eccentricity"],
    "window": 20,
    "window_tolerance": 1e-4
  },
  "imaging": {
    "resolution": 64,
    "report_resolution": 512,
    "fov_deg": 2.0,
    "gain": 1.0,
    "k_d": 0.25,
    "k_s": 0.4,
    "materials": { "bus": 2.0, "solar_array": 16.0 }
  },
  "threads": 4,
  "output_dir": "result"
}
)";
}

void write_default_scenario(const std::string& dir) {
  const std::filesystem::path d(dir);
  std::error_code ec;
  std::filesystem::create_directories(d, ec);
  if (ec) throw ConfigError("cannot create '" + dir + "': " + ec.message());
  write_text(d / "panel_satellite.obj", panel_satellite_obj());
  const auto [l1, l2] = format_tle(default_target_tle());
  write_text(d / "target.tle", default_target_tle().name + "\n" + l1 + "\n" + l2 + "\n");
  write_text(d / "scenario.json", default_config_json());
}

}  // namespace specorb
