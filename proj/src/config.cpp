#include "specorb/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "specorb/time.hpp"

namespace specorb {

namespace {

using json = nlohmann::ordered_json;

class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(label() + " must be an object");
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown config key '" + prefix() + it.key() + "'");
  }

  bool has(const std::string& k) {
    seen_.insert(k);
    return j_.contains(k) && !j_.at(k).is_null();
  }

  const json& raw(const std::string& k) { return j_.at(k); }

  double number(const std::string& k, double def) {
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_number()) throw ConfigError("'" + prefix() + k + "' must be a number");
    return v.get<double>();
  }

  std::optional<double> optional_number(const std::string& k) {
    if (!has(k)) return std::nullopt;
    return number(k, 0.0);
  }

  int integer(const std::string& k, int def) {
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_number_integer()) throw ConfigError("'" + prefix() + k + "' must be an integer");
    return v.get<int>();
  }

  bool boolean(const std::string& k, bool def) {
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_boolean()) throw ConfigError("'" + prefix() + k + "' must be true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& k, const std::string& def) {
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_string()) throw ConfigError("'" + prefix() + k + "' must be a string");
    return v.get<std::string>();
  }

  std::array<double, 3> triple(const std::string& k, std::array<double, 3> def) {
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_array() || v.size() != 3) throw ConfigError("'" + prefix() + k + "' must be a list of three numbers");
    std::array<double, 3> out{};
    for (std::size_t i = 0; i < 3; ++i) {
      if (!v[i].is_number()) throw ConfigError("'" + prefix() + k + "' must be a list of three numbers");
      out[i] = v[i].get<double>();
    }
    return out;
  }

  std::map<std::string, double> number_map(const std::string& k) {
    std::map<std::string, double> out;
    if (!has(k)) return out;
    const json& v = j_.at(k);
    if (!v.is_object()) throw ConfigError("'" + prefix() + k + "' must be an object of numbers");
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (!it.value().is_number()) throw ConfigError("'" + prefix() + k + "." + it.key() + "' must be a number");
      out[it.key()] = it.value().get<double>();
    }
    return out;
  }

  std::string prefix() const { return where_.empty() ? "" : where_ + "."; }

 private:
  std::string label() const { return where_.empty() ? "config" : "'" + where_ + "'"; }

  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

void validate(const RunConfig& c) {
  require(!c.target_tle.empty(), "'target_tle' is required");
  require(!c.mesh.empty(), "'mesh' is required");
  require(c.gravity == "wgs72" || c.gravity == "wgs84", "'gravity' must be wgs72 or wgs84");
  if (c.epoch_override) parse_utc(*c.epoch_override);
  require(c.duration_s >= 0.0, "'inspection.duration_s' must be >= 0 (0 selects one period)");
  require(c.snapshots >= 1, "'inspection.snapshots' must be at least 1");
  require(c.distance_m > 0.0, "'inspection.distance_m' must be positive");
  require(c.start_offset_s >= 0.0, "'inspection.start_offset_s' must be >= 0");
  require(c.lambda_S >= 0.0, "'weights.lambda_S' must be >= 0");
  require(!c.lambda_d || *c.lambda_d >= 0.0, "'weights.lambda_d' must be >= 0");
  require(c.alpha >= 1.0, "'weights.alpha' must be >= 1");
  distance_convention_from_name(c.distance_cost_convention);
  require(c.lr > 0.0, "'optimizer.lr' must be positive");
  require(c.beta1 >= 0.0 && c.beta1 < 1.0, "'optimizer.beta1' must lie in [0, 1)");
  require(c.beta2 >= 0.0 && c.beta2 < 1.0, "'optimizer.beta2' must lie in [0, 1)");
  require(c.epsilon > 0.0, "'optimizer.epsilon' must be positive");
  require(c.iterations >= 0, "'optimizer.iterations' must be >= 0");
  require(!c.decision_variables.empty() && c.decision_variables.size() <= 6,
          "'optimizer.decision_variables' needs one to six entries");
  std::set<ElementId> ids;
  for (const auto& v : c.decision_variables)
    require(ids.insert(element_from_name(v)).second, "duplicate decision variable '" + v + "'");
  for (const auto& [k, v] : c.variable_scale) {
    element_from_name(k);
    require(v > 0.0, "'optimizer.variable_scale." + k + "' must be positive");
  }
  require(c.window >= 1, "'optimizer.window' must be at least 1");
  require(c.window_tolerance >= 0.0, "'optimizer.window_tolerance' must be >= 0");
  require(c.resolution >= 1 && c.resolution <= 4096, "'imaging.resolution' must lie in [1, 4096]");
  require(c.report_resolution >= 1 && c.report_resolution <= 4096,
          "'imaging.report_resolution' must lie in [1, 4096]");
  require(c.fov_deg > 1.0 && c.fov_deg < 120.0, "'imaging.fov_deg' must lie in (1, 120)");
  require(c.gain > 0.0, "'imaging.gain' must be positive");
  require(!c.full_well || *c.full_well > 0.0, "'imaging.full_well' must be positive");
  require(c.k_d >= 0.0 && c.k_s >= 0.0, "'imaging.k_d' and 'imaging.k_s' must be >= 0");
  require(c.e_sun > 0.0, "'imaging.e_sun' must be positive");
  for (const auto& [k, v] : c.materials) require(v >= 1.0, "'imaging.materials." + k + "' must be >= 1");
  const double up = std::sqrt(c.up_hint[0] * c.up_hint[0] + c.up_hint[1] * c.up_hint[1] + c.up_hint[2] * c.up_hint[2]);
  require(up > 0.0, "'imaging.up_hint' must be nonzero");
  require(c.threads >= 1 && c.threads <= 256, "'threads' must lie in [1, 256]");
  require(!c.output_dir.empty(), "'output_dir' must not be empty");
}

Tle read_single_tle(const std::string& path) {
  const auto all = read_tle_file(path);
  if (all.empty()) throw ConfigError("no element set in '" + path + "'");
  return all.front();
}

}  // namespace

std::string RunConfig::resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  c.base_dir = base_dir;
  Reader top(j, "");
  c.target_tle = top.text("target_tle", "");
  c.chaser_tle = top.text("chaser_tle", "");
  c.mesh = top.text("mesh", "");
  if (top.has("epoch_override")) c.epoch_override = top.text("epoch_override", "");
  c.gravity = top.text("gravity", c.gravity);
  c.threads = top.integer("threads", c.threads);
  c.output_dir = top.text("output_dir", c.output_dir);

  if (top.has("inspection")) {
    Reader r(top.raw("inspection"), "inspection");
    c.duration_s = r.number("duration_s", c.duration_s);
    c.snapshots = r.integer("snapshots", c.snapshots);
    c.distance_m = r.number("distance_m", c.distance_m);
    c.start_offset_s = r.number("start_offset_s", c.start_offset_s);
    r.finish();
  }
  if (top.has("weights")) {
    Reader r(top.raw("weights"), "weights");
    c.lambda_S = r.number("lambda_S", c.lambda_S);
    c.lambda_d = r.optional_number("lambda_d");
    c.alpha = r.number("alpha", c.alpha);
    c.distance_cost_convention = r.text("distance_cost_convention", c.distance_cost_convention);
    r.finish();
  }
  if (top.has("optimizer")) {
    Reader r(top.raw("optimizer"), "optimizer");
    c.lr = r.number("lr", c.lr);
    c.beta1 = r.number("beta1", c.beta1);
    c.beta2 = r.number("beta2", c.beta2);
    c.epsilon = r.number("epsilon", c.epsilon);
    c.iterations = r.integer("iterations", c.iterations);
    if (r.has("decision_variables")) {
      const json& v = r.raw("decision_variables");
      if (!v.is_array()) throw ConfigError("'optimizer.decision_variables' must be a list of names");
      c.decision_variables.clear();
      for (const auto& e : v) {
        if (!e.is_string()) throw ConfigError("'optimizer.decision_variables' must be a list of names");
        c.decision_variables.push_back(e.get<std::string>());
      }
    }
    c.window = r.integer("window", c.window);
    c.window_tolerance = r.number("window_tolerance", c.window_tolerance);
    c.variable_scale = r.number_map("variable_scale");
    r.finish();
  }
  if (top.has("imaging")) {
    Reader r(top.raw("imaging"), "imaging");
    c.resolution = r.integer("resolution", c.resolution);
    c.report_resolution = r.integer("report_resolution", c.report_resolution);
    c.fov_deg = r.number("fov_deg", c.fov_deg);
    c.gain = r.number("gain", c.gain);
    c.full_well = r.optional_number("full_well");
    c.k_d = r.number("k_d", c.k_d);
    c.k_s = r.number("k_s", c.k_s);
    c.e_sun = r.number("e_sun", c.e_sun);
    c.materials = r.number_map("materials");
    c.smooth_normals = r.boolean("smooth_normals", c.smooth_normals);
    c.attitude_deg = r.triple("attitude_deg", c.attitude_deg);
    c.up_hint = r.triple("up_hint", c.up_hint);
    r.finish();
  }
  top.finish();
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  std::filesystem::path base = std::filesystem::path(path).parent_path();
  return parse_config(ss.str(), base.empty() ? "." : base.string());
}

std::string to_json_text(const RunConfig& c) {
  json j;
  j["target_tle"] = c.target_tle;
  if (!c.chaser_tle.empty()) j["chaser_tle"] = c.chaser_tle;
  j["mesh"] = c.mesh;
  if (c.epoch_override) j["epoch_override"] = *c.epoch_override;
  j["gravity"] = c.gravity;
  j["inspection"] = {{"duration_s", c.duration_s},
                     {"snapshots", c.snapshots},
                     {"distance_m", c.distance_m},
                     {"start_offset_s", c.start_offset_s}};
  json w = {{"lambda_S", c.lambda_S}};
  if (c.lambda_d) w["lambda_d"] = *c.lambda_d;
  w["alpha"] = c.alpha;
  w["distance_cost_convention"] = c.distance_cost_convention;
  j["weights"] = w;
  json o = {{"lr", c.lr},     {"beta1", c.beta1},           {"beta2", c.beta2},
            {"epsilon", c.epsilon}, {"iterations", c.iterations}, {"decision_variables", c.decision_variables},
            {"window", c.window}, {"window_tolerance", c.window_tolerance}};
  json scale = json::object();
  for (const auto& [k, v] : c.variable_scale) scale[k] = v;
  o["variable_scale"] = scale;
  j["optimizer"] = o;
  json im = {{"resolution", c.resolution}, {"report_resolution", c.report_resolution},
             {"fov_deg", c.fov_deg},       {"gain", c.gain}};
  if (c.full_well) im["full_well"] = *c.full_well;
  im["k_d"] = c.k_d;
  im["k_s"] = c.k_s;
  im["e_sun"] = c.e_sun;
  json mats = json::object();
  for (const auto& [k, v] : c.materials) mats[k] = v;
  im["materials"] = mats;
  im["smooth_normals"] = c.smooth_normals;
  im["attitude_deg"] = c.attitude_deg;
  im["up_hint"] = c.up_hint;
  j["imaging"] = im;
  j["threads"] = c.threads;
  j["output_dir"] = c.output_dir;
  return j.dump(2) + "\n";
}

Scenario build_scenario(const RunConfig& c) {
  validate(c);
  Scenario s;
  s.config = c;
  const std::string tle_path = c.resolve(c.target_tle);
  const std::string mesh_path = c.resolve(c.mesh);
  require(std::filesystem::exists(tle_path), "target TLE '" + tle_path + "' does not exist");
  require(std::filesystem::exists(mesh_path), "mesh '" + mesh_path + "' does not exist");
  s.target = read_single_tle(tle_path);
  if (c.epoch_override) {
    const CalendarTime cal = parse_utc(*c.epoch_override);
    s.target.epoch = julian_day(cal);
    s.target.epoch_year = cal.year % 100;
    s.target.epoch_day = day_of_year(cal.year, cal.month, cal.day) +
                         (cal.hour * 3600.0 + cal.minute * 60.0 + cal.second) / 86400.0;
  }
  if (c.chaser_tle.empty()) {
    s.chaser = init_chaser(s.target, c.distance_m);
  } else {
    const std::string p = c.resolve(c.chaser_tle);
    require(std::filesystem::exists(p), "chaser TLE '" + p + "' does not exist");
    s.chaser = read_single_tle(p);
  }

  MeshOptions mo;
  mo.smooth_normals = c.smooth_normals;
  constexpr double deg = 3.14159265358979323846 / 180.0;
  mo.rotation = rotation_zyx(c.attitude_deg[0] * deg, c.attitude_deg[1] * deg, c.attitude_deg[2] * deg);
  s.mesh = std::make_unique<TriangleMesh>(load_obj_file(mesh_path, mo));
  s.bvh = std::make_unique<Bvh>(*s.mesh);

  TrajectoryProblem& pb = s.problem;
  pb.target = elements_from_tle(s.target);
  pb.gravity = c.gravity == "wgs84" ? GravityModel::wgs84 : GravityModel::wgs72;
  if (!(s.chaser.epoch == s.target.epoch)) pb.chaser_epoch = s.chaser.epoch;
  pb.mesh = s.mesh.get();
  pb.bvh = s.bvh.get();
  pb.shading.e_sun = c.e_sun;
  pb.shading.gain = c.gain;
  pb.shading.k_d = c.k_d;
  pb.shading.k_s = c.k_s;
  pb.shading.alpha = c.alpha;
  pb.shading.full_well = c.full_well.value_or(0.0);
  pb.shading.material_alpha.assign(s.mesh->material_names.size(), -1.0);
  for (std::size_t m = 0; m < s.mesh->material_names.size(); ++m) {
    const auto it = c.materials.find(s.mesh->material_names[m]);
    if (it != c.materials.end()) pb.shading.material_alpha[m] = it->second;
  }
  pb.weights.lambda_S = c.lambda_S;
  pb.weights.lambda_d = c.lambda_d.value_or(-1.0);
  pb.weights.d = c.distance_m;
  pb.weights.convention = distance_convention_from_name(c.distance_cost_convention);
  pb.window.duration_s = c.duration_s;
  pb.window.snapshots = c.snapshots;
  pb.window.start_offset_s = c.start_offset_s;
  pb.camera.width = pb.camera.height = c.resolution;
  pb.camera.fov_deg = c.fov_deg;
  pb.camera.up_hint = {c.up_hint[0], c.up_hint[1], c.up_hint[2]};
  pb.threads = c.threads;

  OptimizerSettings& o = s.optimizer;
  o.iterations = c.iterations;
  o.variables.clear();
  for (const auto& v : c.decision_variables) o.variables.push_back(element_from_name(v));
  o.adam = AdamParams{c.lr, c.beta1, c.beta2, c.epsilon};
  o.window = c.window;
  o.window_tolerance = c.window_tolerance;
  for (const auto& [k, v] : c.variable_scale) o.scale[element_from_name(k)] = v;
  return s;
}

}  // namespace specorb
