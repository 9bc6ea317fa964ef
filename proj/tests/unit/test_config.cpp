#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "scenario_fixture.hpp"
#include "specorb/config.hpp"
#include "specorb/report.hpp"
#include "specorb/scenario.hpp"

using namespace specorb;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({"target_tle": "t.tle", "mesh": "m.obj"})";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config defaults") {
  const RunConfig c = parse_config(kMinimal, "/base");
  CHECK(c.snapshots == 16);
  CHECK(c.duration_s == 0.0);
  CHECK(c.distance_m == 500.0);
  CHECK(c.lambda_S == 1.0);
  CHECK_FALSE(c.lambda_d.has_value());
  CHECK(c.alpha == 2.0);
  CHECK(c.lr == 4e-6);
  CHECK(c.iterations == 200);
  CHECK(c.decision_variables == std::vector<std::string>{"inclination", "mean_anomaly", "eccentricity"});
  CHECK(c.window == 20);
  CHECK(c.window_tolerance == 1e-4);
  CHECK(c.resolve("t.tle") == "/base/t.tle");
  CHECK(c.resolve("/abs/x.obj") == "/abs/x.obj");
}

TEST_CASE("config parsing of every section") {
  const RunConfig c = parse_config(R"({
    "target_tle": "a.tle", "chaser_tle": "b.tle", "mesh": "m.obj",
    "epoch_override": "2024-11-03T12:30:00Z", "gravity": "wgs84",
    "inspection": {"duration_s": 1800, "snapshots": 8, "distance_m": 250, "start_offset_s": 60},
    "weights": {"lambda_S": 2.0, "lambda_d": 0.001, "alpha": 4, "distance_cost_convention": "norm_squared"},
    "optimizer": {"lr": 1e-5, "beta1": 0.8, "beta2": 0.99, "epsilon": 1e-9, "iterations": 50,
                  "decision_variables": ["mean_anomaly", "raan"], "window": 10, "window_tolerance": 1e-3,
                  "variable_scale": {"raan": 0.5}},
    "imaging": {"resolution": 32, "report_resolution": 128, "fov_deg": 5, "gain": 2, "full_well": 300,
                "k_d": 0.1, "k_s": 0.9, "e_sun": 1000, "materials": {"gold": 30},
                "smooth_normals": true, "attitude_deg": [10, 0, 5], "up_hint": [0, 0, 1]},
    "threads": 3, "output_dir": "out"
  })");
  CHECK(c.chaser_tle == "b.tle");
  CHECK(*c.epoch_override == "2024-11-03T12:30:00Z");
  CHECK(c.gravity == "wgs84");
  CHECK(c.duration_s == 1800.0);
  CHECK(c.snapshots == 8);
  CHECK(c.start_offset_s == 60.0);
  CHECK(*c.lambda_d == 0.001);
  CHECK(c.distance_cost_convention == "norm_squared");
  CHECK(c.decision_variables.size() == 2);
  CHECK(c.variable_scale.at("raan") == 0.5);
  CHECK(*c.full_well == 300.0);
  CHECK(c.materials.at("gold") == 30.0);
  CHECK(c.smooth_normals);
  CHECK(c.attitude_deg[2] == 5.0);
  CHECK(c.up_hint[2] == 1.0);
  CHECK(c.threads == 3);

  // canonical text round trip
  const std::string text = to_json_text(c);
  const RunConfig d = parse_config(text);
  CHECK(to_json_text(d) == text);
}

TEST_CASE("config errors") {
  auto bad = [](const std::string& text) { CHECK_THROWS_AS(parse_config(text), ConfigError); };
  bad("{not json");
  bad("[]");
  bad(R"({"mesh": "m.obj"})");
  bad(R"({"target_tle": "t.tle", "mesh": "m.obj", "colour": 1})");
  bad(R"({"target_tle": "t.tle", "mesh": "m.obj", "inspection": {"snapshot": 4}})");
  bad(R"({"target_tle": "t.tle", "mesh": "m.obj", "inspection": {"snapshots": 0}})");
  bad(R"({"target_tle": "t.tle", "mesh": "m.obj", "inspection": {"snapshots": 2.5}})");
  bad(R"({"target_tle": "t.tle", "mesh": "m.obj", "inspection": {"distance_m": 0}})");
  bad(R"({"target_tle": "t.tle", "mesh": "m.obj", "weights": {"alpha": 0.5}})");
  bad(R"({"target_tle": "t.tle", "mesh": "m.obj", "weights": {"lambda_d": -1}})");
  bad(R"({"target_tle": "t.tle", "mesh": "m.obj", "weights": {"distance_cost_convention": "cube"}})");
  bad(R"({"target_tle": "t.tle", "mesh": "m.obj", "optimizer": {"decision_variables": ["semi_latus"]}})");
  bad(R"({"target_tle": "t.tle", "mesh": "m.obj", "optimizer": {"decision_variables": ["raan", "raan"]}})");
  bad(R"({"target_tle": "t.tle", "mesh": "m.obj", "optimizer": {"lr": 0}})");
  bad(R"({"target_tle": "t.tle", "mesh": "m.obj", "optimizer": {"iterations": -1}})");
  bad(R"({"target_tle": "t.tle", "mesh": "m.obj", "imaging": {"fov_deg": 180}})");
  bad(R"({"target_tle": "t.tle", "mesh": "m.obj", "imaging": {"attitude_deg": [1, 2]}})");
  bad(R"({"target_tle": "t.tle", "mesh": "m.obj", "imaging": {"up_hint": [0, 0, 0]}})");
  bad(R"({"target_tle": "t.tle", "mesh": "m.obj", "gravity": "egm96"})");
  bad(R"({"target_tle": "t.tle", "mesh": "m.obj", "epoch_override": "yesterday"})");
  bad(R"({"target_tle": "t.tle", "mesh": "m.obj", "threads": 0})");
  CHECK_THROWS_AS(load_config("/nonexistent/specorb.json"), ConfigError);
}

TEST_CASE("build_scenario requires the referenced files") {
  const std::string dir = testdata::scratch_dir("missing");
  const RunConfig c = parse_config(kMinimal, dir);
  CHECK_THROWS_AS(build_scenario(c), ConfigError);
}

TEST_CASE("shipped scenario") {
  const RunConfig c = testdata::shipped_config();
  const Scenario s = build_scenario(c);
  CHECK(s.target.catalog_number == "90001");
  CHECK(s.mesh->material_names.size() == 2);
  CHECK(s.mesh->size() == 16);
  CHECK(s.problem.shading.material_alpha.size() == 2);
  CHECK_FALSE(s.problem.chaser_epoch.has_value());
  CHECK(s.problem.weights.lambda_d_effective() == doctest::Approx(1.0 / (500.0 * 500.0)));
  CHECK(s.optimizer.variables.size() == 3);
  CHECK(s.problem.camera.width == 64);
  // the chaser trails the target along-track
  const Vec3d rel = relative_position_at(s.problem, elements_from_tle(s.chaser), 0.0);
  CHECK(rel.y < -450.0);

  // written TLE parses back to the in-memory element set
  const Tle back = read_tle_file(c.resolve(c.target_tle)).front();
  CHECK(back.inclination == s.target.inclination);
  CHECK(back.mean_motion == s.target.mean_motion);
  CHECK(back.epoch == default_target_tle().epoch);
}

TEST_CASE("panel satellite geometry") {
  PanelSatelliteShape shape;
  const TriangleMesh m = parse_obj(panel_satellite_obj(shape));
  CHECK(m.size() == 16);
  double area = 0.0;
  auto corner = [&](std::size_t t, int k) { return m.vertices[static_cast<std::size_t>(m.triangles[t][k])]; };
  for (std::size_t t = 0; t < m.size(); ++t)
    area += 0.5 * norm(cross(corner(t, 1) - corner(t, 0), corner(t, 2) - corner(t, 0)));
  CHECK(area == doctest::Approx(6 * 4.0 + 2 * 5.0 * 1.8));
  // bus faces wound outward: normal . centroid > 0
  for (std::size_t t = 0; t < 12; ++t) {
    const Vec3d c = (1.0 / 3.0) * (corner(t, 0) + corner(t, 1) + corner(t, 2));
    CHECK(dot(m.face_normals[t], c) > 0.0);
  }
  // array normals tilted 35 degrees from +R toward -T
  const Vec3d n = m.face_normals[12];
  const double t = 35.0 * std::numbers::pi / 180.0;
  CHECK(std::fabs(std::fabs(dot(n, Vec3d{std::cos(t), -std::sin(t), 0.0})) - 1.0) < 1e-12);
}

TEST_CASE("epoch override shifts the target epoch only") {
  RunConfig c = testdata::shipped_config();
  c.epoch_override = "2024-11-04T00:00:00Z";
  const Scenario s = build_scenario(c);
  CHECK(s.target.epoch == julian_day(CalendarTime{2024, 11, 4, 0, 0, 0.0}));
  CHECK(s.target.epoch_day == doctest::Approx(309.0));
}

TEST_CASE("relative trace of the initial orbit closes within 2% of d") {
  const Scenario s = build_scenario(testdata::shipped_config());
  const MeanElements<double> e = elements_from_tle(s.chaser);
  CHECK(relative_trace_closure(s.problem, e) < 0.02 * s.problem.weights.d);
  CHECK(relative_trace_closure(s.problem, e, 1234.0) < 0.02 * s.problem.weights.d);
}

TEST_CASE("svg writer") {
  PlotSeries a{"a & b", "black", {0, 1, 2, 3}, {1, NAN, 2, 3}, {1, 1, 0}, false, true};
  PlotPanel p{"title <x>", "x", "y", {a}, false, {{0.0, 0.0}}};
  std::ostringstream o1, o2;
  write_svg_plot(o1, {p});
  write_svg_plot(o2, {p});
  const std::string s = o1.str();
  CHECK(s == o2.str());
  CHECK(s.find("<svg") != std::string::npos);
  CHECK(s.find("</svg>") != std::string::npos);
  CHECK(s.find("a &amp; b") != std::string::npos);
  CHECK(s.find("title &lt;x&gt;") != std::string::npos);
  CHECK(s.find("stroke-dasharray") != std::string::npos);
  CHECK(s.find("nan") == std::string::npos);
}

TEST_CASE("result directory round trip and report regeneration") {
  RunConfig c = testdata::shipped_config();
  c.resolution = 16;
  c.report_resolution = 32;
  c.iterations = 6;
  const Scenario s = build_scenario(c);
  const OptimizationResult r = optimize(s.problem, s.chaser, s.optimizer);
  const std::string dir = testdata::scratch_dir("result");
  write_result_dir(dir, s, r);

  for (const char* f : {"history.csv", "initial.tle", "optimized.tle", "config.json", "result.json", "mesh.obj",
                        "target_input.tle", "report/cost_history.svg", "report/rtn_orbit.svg",
                        "report/saturation.svg", "report/frame_initial.ppm", "report/saturation.csv",
                        "report/rtn_trace.csv", "report/summary.json"})
    CHECK_MESSAGE(fs::exists(fs::path(dir) / f), f);

  const PersistedResult p = load_result_dir(dir);
  CHECK(p.history.size() == 6);
  CHECK(p.final_elements.mean_anomaly == r.final_elements.mean_anomaly);
  CHECK(p.final_elements.inclination == r.final_elements.inclination);
  CHECK(p.history.back().cost.total == r.history.back().cost.total);
  CHECK(p.config.iterations == 6);
  CHECK(p.config.resolution == 16);

  // regenerated assets match byte for byte
  const std::string again = testdata::scratch_dir("report");
  write_report(dir, again);
  for (const char* f : {"cost_history.svg", "rtn_orbit.svg", "saturation.svg", "frame_optimized.ppm",
                        "saturation.csv", "rtn_trace.csv", "summary.json"})
    CHECK_MESSAGE(slurp(fs::path(dir) / "report" / f) == slurp(fs::path(again) / f), f);

  // the snapshot config is self-contained
  const Scenario back = build_scenario(p.config);
  CHECK(back.target.mean_motion == s.target.mean_motion);
}

TEST_CASE("report bundle contents") {
  RunConfig c = testdata::shipped_config();
  const Scenario s = build_scenario(c);
  const MeanElements<double> e = elements_from_tle(s.chaser);
  ReportOptions o;
  o.resolution = 32;
  o.trace_samples = 101;
  const ReportBundle b = evaluate_report(s.problem, e, e, o);
  REQUIRE(b.initial_trace.size() == 101);
  CHECK(b.initial_trace.front().in_window);
  CHECK_FALSE(b.initial_trace.back().in_window);
  CHECK(b.initial_saturation.size() == 17);
  CHECK(b.saturation_sum(false) == b.saturation_sum(true));
  REQUIRE(b.initial_frame.snapshot >= 0);
  CHECK_FALSE(b.initial_saturation[static_cast<std::size_t>(b.initial_frame.snapshot)].eclipsed);
  for (const auto& q : b.initial_saturation)
    if (q.eclipsed) CHECK(q.saturation == 0.0);
  CHECK(b.initial_frame.width == 32);
  for (const auto& q : b.initial_saturation) CHECK(q.specular <= b.initial_frame.specular + 1e-12);
  CHECK_THROWS_AS(evaluate_report(s.problem, e, e, ReportOptions{0, 10}), ConfigError);
}
