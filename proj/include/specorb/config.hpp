#pragma once

// JSON run configuration and the assembled scenario it describes.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "specorb/geometry.hpp"
#include "specorb/objective.hpp"
#include "specorb/optimizer.hpp"
#include "specorb/tle.hpp"

namespace specorb {

struct RunConfig {
  std::string target_tle;  // paths as written; resolved against base_dir
  std::string chaser_tle;  // empty: initialise from the target
  std::string mesh;
  std::optional<std::string> epoch_override;  // UTC, replaces the target TLE epoch
  std::string gravity = "wgs72";

  double duration_s = 0.0;
  int snapshots = 16;
  double distance_m = 500.0;
  double start_offset_s = 0.0;

  double lambda_S = 1.0;
  std::optional<double> lambda_d;  // default 1 / d^2
  double alpha = 2.0;
  std::string distance_cost_convention = "norm";

  double lr = 4e-6, beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;
  int iterations = 200;
  std::vector<std::string> decision_variables{"inclination", "mean_anomaly", "eccentricity"};
  int window = 20;
  double window_tolerance = 1e-4;
  std::map<std::string, double> variable_scale;

  int resolution = 64;
  int report_resolution = 512;
  double fov_deg = 2.0;
  double gain = 1.0;
  std::optional<double> full_well;
  double k_d = 0.6, k_s = 0.4, e_sun = 1361.0;
  std::map<std::string, double> materials;  // name -> Phong exponent
  bool smooth_normals = false;
  std::array<double, 3> attitude_deg{0.0, 0.0, 0.0};  // yaw, pitch, roll of the body in RTN
  std::array<double, 3> up_hint{1.0, 0.0, 0.0};

  int threads = 1;
  std::string output_dir = "result";

  std::string base_dir = ".";  // directory of the config file

  std::string resolve(const std::string& path) const;
};

/// Parses and validates; unknown keys are errors.
RunConfig parse_config(const std::string& json_text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

/// Canonical JSON text (stable key order); parse_config(to_json_text(c)) == c.
std::string to_json_text(const RunConfig& c);

/// Everything built from a config. Owns the mesh the problem points into.
struct Scenario {
  RunConfig config;
  Tle target;
  Tle chaser;
  std::unique_ptr<TriangleMesh> mesh;
  std::unique_ptr<Bvh> bvh;
  TrajectoryProblem problem;
  OptimizerSettings optimizer;

  Scenario() = default;
  Scenario(Scenario&&) = default;
  Scenario& operator=(Scenario&&) = default;
};

Scenario build_scenario(const RunConfig& c);

}  // namespace specorb
