#pragma once

// The shipped inspection scenario: a procedurally generated panel satellite
// and a LEO target element set.

#include <string>

#include "specorb/tle.hpp"

namespace specorb {

/// Body frame axes: x radial, y along-track, z cross-track (metres).
struct PanelSatelliteShape {
  double bus_size = 2.0;      // cube edge
  double array_length = 5.0;  // along z, each wing
  double array_width = 1.8;
  double array_gap = 0.4;     // bus face to array root
  double array_tilt_deg = 35.0;  // rotation of the array normal about z, from +x toward -y
};

/// Bus cube (material "bus") plus two flat arrays (material "solar_array").
std::string panel_satellite_obj(const PanelSatelliteShape& shape = {});

Tle default_target_tle();

/// JSON run config referring to `target.tle` and `panel_satellite.obj`
/// next to it.
std::string default_config_json();

/// Writes panel_satellite.obj, target.tle and scenario.json into `dir`.
void write_default_scenario(const std::string& dir);

}  // namespace specorb
