#include "specorb/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace specorb {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '&': o += "&amp;"; break;
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

double nice_step(double range, int target) {
  if (!(range > 0.0)) return 1.0;
  const double raw = range / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  const double n = r < 1.5 ? 1.0 : (r < 3.0 ? 2.0 : (r < 7.0 ? 5.0 : 10.0));
  return n * mag;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12 * std::max(1.0, std::fabs(hi))) {
      const double pad = std::max(1e-9, 0.5 * std::fabs(hi));
      lo -= pad;
      hi += pad;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

void write_panel(std::ostream& o, const PlotPanel& p, double x0, double y0, double w, double h) {
  const double ml = 78, mr = 16, mt = 28, mb = 44;
  const double pw = w - ml - mr, ph = h - mt - mb;
  Range rx, ry;
  for (const auto& s : p.series) {
    for (double v : s.x) rx.add(v);
    for (double v : s.y) ry.add(v);
  }
  for (const auto& pt : p.points) rx.add(pt[0]), ry.add(pt[1]);
  rx.finish();
  ry.finish();
  if (p.equal_aspect) {
    const double sx = (rx.hi - rx.lo) / pw, sy = (ry.hi - ry.lo) / ph;
    if (sx > sy) {
      const double c = 0.5 * (ry.lo + ry.hi), half = 0.5 * sx * ph;
      ry.lo = c - half, ry.hi = c + half;
    } else {
      const double c = 0.5 * (rx.lo + rx.hi), half = 0.5 * sy * pw;
      rx.lo = c - half, rx.hi = c + half;
    }
  }
  auto X = [&](double v) { return x0 + ml + (v - rx.lo) / (rx.hi - rx.lo) * pw; };
  auto Y = [&](double v) { return y0 + mt + (ry.hi - v) / (ry.hi - ry.lo) * ph; };

  o << "<g>\n";
  o << "<rect x=\"" << fmt("%.2f", x0 + ml) << "\" y=\"" << fmt("%.2f", y0 + mt) << "\" width=\"" << fmt("%.2f", pw)
    << "\" height=\"" << fmt("%.2f", ph) << "\" fill=\"white\" stroke=\"#444\"/>\n";
  o << "<text x=\"" << fmt("%.2f", x0 + ml + pw / 2) << "\" y=\"" << fmt("%.2f", y0 + 18)
    << "\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(p.title) << "</text>\n";
  o << "<text x=\"" << fmt("%.2f", x0 + ml + pw / 2) << "\" y=\"" << fmt("%.2f", y0 + h - 6)
    << "\" text-anchor=\"middle\" font-size=\"12\">" << xml_escape(p.xlabel) << "</text>\n";
  o << "<text transform=\"translate(" << fmt("%.2f", x0 + 14) << "," << fmt("%.2f", y0 + mt + ph / 2)
    << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">" << xml_escape(p.ylabel) << "</text>\n";

  const double stx = nice_step(rx.hi - rx.lo, 6), sty = nice_step(ry.hi - ry.lo, 5);
  for (double v = std::ceil(rx.lo / stx) * stx; v <= rx.hi; v += stx) {
    const double vv = std::fabs(v) < 1e-9 * stx ? 0.0 : v;
    o << "<line x1=\"" << fmt("%.2f", X(vv)) << "\" y1=\"" << fmt("%.2f", y0 + mt + ph) << "\" x2=\""
      << fmt("%.2f", X(vv)) << "\" y2=\"" << fmt("%.2f", y0 + mt) << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << fmt("%.2f", X(vv)) << "\" y=\"" << fmt("%.2f", y0 + mt + ph + 15)
      << "\" text-anchor=\"middle\" font-size=\"10\">" << fmt("%g", vv) << "</text>\n";
  }
  for (double v = std::ceil(ry.lo / sty) * sty; v <= ry.hi; v += sty) {
    const double vv = std::fabs(v) < 1e-9 * sty ? 0.0 : v;
    o << "<line x1=\"" << fmt("%.2f", x0 + ml) << "\" y1=\"" << fmt("%.2f", Y(vv)) << "\" x2=\""
      << fmt("%.2f", x0 + ml + pw) << "\" y2=\"" << fmt("%.2f", Y(vv)) << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << fmt("%.2f", x0 + ml - 4) << "\" y=\"" << fmt("%.2f", Y(vv) + 3)
      << "\" text-anchor=\"end\" font-size=\"10\">" << fmt("%g", vv) << "</text>\n";
  }

  for (const auto& s : p.series) {
    const std::size_t n = std::min(s.x.size(), s.y.size());
    std::size_t i = 0;
    while (i + 1 < n) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || !std::isfinite(s.x[i + 1]) ||
          !std::isfinite(s.y[i + 1])) {
        ++i;
        continue;
      }
      const bool solid = s.solid.empty() || s.solid[i];
      std::size_t j = i;
      std::ostringstream pts;
      pts << fmt("%.2f", X(s.x[i])) << ',' << fmt("%.2f", Y(s.y[i]));
      while (j + 1 < n && std::isfinite(s.x[j + 1]) && std::isfinite(s.y[j + 1]) &&
             (s.solid.empty() || (s.solid[j] != 0) == solid)) {
        ++j;
        pts << ' ' << fmt("%.2f", X(s.x[j])) << ',' << fmt("%.2f", Y(s.y[j]));
      }
      o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
        << (solid ? "" : " stroke-dasharray=\"6,4\"") << " points=\"" << pts.str() << "\"/>\n";
      i = j;
    }
    if (s.start_marker && n > 0 && std::isfinite(s.x[0]) && std::isfinite(s.y[0]))
      o << "<circle cx=\"" << fmt("%.2f", X(s.x[0])) << "\" cy=\"" << fmt("%.2f", Y(s.y[0]))
        << "\" r=\"5\" fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"/>\n";
    if (s.markers)
      for (std::size_t k = 0; k < n; ++k)
        if (std::isfinite(s.x[k]) && std::isfinite(s.y[k]))
          o << "<circle cx=\"" << fmt("%.2f", X(s.x[k])) << "\" cy=\"" << fmt("%.2f", Y(s.y[k]))
            << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
  }
  for (const auto& pt : p.points)
    o << "<circle cx=\"" << fmt("%.2f", X(pt[0])) << "\" cy=\"" << fmt("%.2f", Y(pt[1]))
      << "\" r=\"4\" fill=\"black\"/>\n";

  double ly = y0 + mt + 14;
  for (const auto& s : p.series) {
    if (s.label.empty()) continue;
    const double lx = x0 + ml + pw - 150;
    o << "<line x1=\"" << fmt("%.2f", lx) << "\" y1=\"" << fmt("%.2f", ly - 4) << "\" x2=\"" << fmt("%.2f", lx + 20)
      << "\" y2=\"" << fmt("%.2f", ly - 4) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << fmt("%.2f", lx + 26) << "\" y=\"" << fmt("%.2f", ly) << "\" font-size=\"11\">"
      << xml_escape(s.label) << "</text>\n";
    ly += 15;
  }
  o << "</g>\n";
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + p.string() + "'");
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void copy_input(const std::string& from, const fs::path& to) {
  if (fs::exists(to) && fs::equivalent(from, to)) return;
  write_file(to, read_file(from));
}

json elements_json(const MeanElements<double>& e) {
  return json{{"epoch_jd_day", e.epoch.day},   {"epoch_jd_fraction", e.epoch.fraction},
              {"inclination", e.inclination},  {"raan", e.raan},
              {"eccentricity", e.eccentricity}, {"arg_perigee", e.arg_perigee},
              {"mean_anomaly", e.mean_anomaly}, {"mean_motion", e.mean_motion},
              {"bstar", e.bstar},              {"ndot", e.ndot},
              {"nddot", e.nddot}};
}

MeanElements<double> elements_from_json(const json& j) {
  try {
    MeanElements<double> e;
    e.epoch.day = j.at("epoch_jd_day").get<std::int64_t>();
    e.epoch.fraction = j.at("epoch_jd_fraction").get<double>();
    e.inclination = j.at("inclination").get<double>();
    e.raan = j.at("raan").get<double>();
    e.eccentricity = j.at("eccentricity").get<double>();
    e.arg_perigee = j.at("arg_perigee").get<double>();
    e.mean_anomaly = j.at("mean_anomaly").get<double>();
    e.mean_motion = j.at("mean_motion").get<double>();
    e.bstar = j.at("bstar").get<double>();
    e.ndot = j.at("ndot").get<double>();
    e.nddot = j.at("nddot").get<double>();
    return e;
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("malformed elements in result.json: ") + ex.what());
  }
}

Frame max_cost_frame(const TrajectoryProblem& pb, const MeanElements<double>& e, const CostBreakdown& c, int threads) {
  Frame f;
  double best = -1.0;
  for (std::size_t i = 0; i < c.snapshots.size(); ++i) {
    const auto& s = c.snapshots[i];
    if (s.eclipsed || s.degenerate_view) continue;
    if (s.specular > best) {
      best = s.specular;
      f.snapshot = static_cast<int>(i);
      f.t_s = s.t_s;
      f.specular = s.specular;
    }
  }
  if (f.snapshot < 0) return f;
  const SnapshotRender r = render_snapshot(pb, e, f.t_s, threads);
  f.width = r.buffers.width;
  f.height = r.buffers.height;
  f.intensity = r.buffers.intensity;
  f.mask = r.buffers.mask;
  return f;
}

std::vector<SaturationPoint> saturation_series(const CostBreakdown& c) {
  std::vector<SaturationPoint> out;
  for (const auto& s : c.snapshots) out.push_back({s.t_s, s.eclipsed, s.eclipsed ? 0.0 : s.saturation, s.specular});
  return out;
}

void write_frame(const fs::path& p, const Frame& f, double full_well) {
  if (f.snapshot < 0) return;
  std::ostringstream os;
  write_ppm(os, f.width, f.height, f.intensity, full_well);
  write_file(p, os.str());
}

}  // namespace

double ReportBundle::saturation_sum(bool optimised) const {
  double s = 0.0;
  for (const auto& p : optimised ? final_saturation : initial_saturation)
    if (!p.eclipsed) s += p.saturation;
  return s;
}

Vec3d relative_position_at(const TrajectoryProblem& pb, const MeanElements<double>& chaser, double t_s) {
  const auto target = Sgp4Model<double>::init(pb.target, pb.gravity);
  const auto model = Sgp4Model<double>::init(chaser, pb.gravity);
  const JulianDate ce = pb.chaser_epoch.value_or(pb.target.epoch);
  const StateVector<double> st = target.propagate(t_s / 60.0);
  const StateVector<double> sc = model.propagate(t_s / 60.0 + pb.target.epoch.days_since(ce) * 1440.0);
  return relative_position(sc.position, st.position, st.velocity);
}

double relative_trace_closure(const TrajectoryProblem& pb, const MeanElements<double>& chaser, double t0) {
  const double period = Sgp4Model<double>::init(pb.target, pb.gravity).period_minutes() * 60.0;
  return norm(relative_position_at(pb, chaser, t0 + period) - relative_position_at(pb, chaser, t0));
}

ReportBundle evaluate_report(const TrajectoryProblem& pb0, const MeanElements<double>& initial,
                             const MeanElements<double>& final_elements, const ReportOptions& opt) {
  if (opt.resolution < 1) throw ConfigError("report resolution must be positive");
  if (opt.trace_samples < 2) throw ConfigError("trace needs at least two samples");
  TrajectoryProblem pb = pb0;
  pb.camera.width = pb.camera.height = opt.resolution;

  ReportBundle r;
  r.full_well = pb.shading.full_well_intensity();
  r.distance_m = pb.weights.d;
  r.window_s = pb.duration_s();
  const double period = Sgp4Model<double>::init(pb.target, pb.gravity).period_minutes() * 60.0;
  const double t0 = pb.window.start_offset_s, span = r.window_s + period;

  const auto target = Sgp4Model<double>::init(pb.target, pb.gravity);
  const double offset_min = pb.target.epoch.days_since(pb.chaser_epoch.value_or(pb.target.epoch)) * 1440.0;
  auto trace = [&](const MeanElements<double>& e) {
    const auto model = Sgp4Model<double>::init(e, pb.gravity);
    std::vector<TracePoint> out;
    for (int k = 0; k < opt.trace_samples; ++k) {
      const double t = t0 + span * k / (opt.trace_samples - 1);
      const StateVector<double> st = target.propagate(t / 60.0);
      const StateVector<double> sc = model.propagate(t / 60.0 + offset_min);
      out.push_back({t, relative_position(sc.position, st.position, st.velocity), t <= t0 + r.window_s + 1e-9});
    }
    return out;
  };
  r.initial_trace = trace(initial);
  r.final_trace = trace(final_elements);

  const CostBreakdown ci = trajectory_cost(pb, initial);
  const CostBreakdown cf = trajectory_cost(pb, final_elements);
  r.initial_saturation = saturation_series(ci);
  r.final_saturation = saturation_series(cf);
  r.initial_frame = max_cost_frame(pb, initial, ci, pb.threads);
  r.final_frame = max_cost_frame(pb, final_elements, cf, pb.threads);
  return r;
}

void write_svg_plot(std::ostream& out, const std::vector<PlotPanel>& panels, int width, int panel_height) {
  const int h = panel_height * static_cast<int>(std::max<std::size_t>(1, panels.size()));
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << h << "\" viewBox=\"0 0 "
      << width << ' ' << h << "\" font-family=\"sans-serif\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"#fafafa\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i)
    write_panel(out, panels[i], 0.0, static_cast<double>(i) * panel_height, width, panel_height);
  out << "</svg>\n";
}

void write_cost_history_svg(std::ostream& out, const std::vector<IterationRecord>& h, const CostWeights& w) {
  PlotSeries total{"total", "black", {}, {}, {}, false};
  PlotSeries ls{"specular sum", "#c0392b", {}, {}, {}, false};
  PlotSeries ld{"distance sum", "#2e64c8", {}, {}, {}, false};
  for (const auto& r : h) {
    total.x.push_back(r.iter);
    total.y.push_back(r.cost.total);
    ls.x.push_back(r.iter);
    ls.y.push_back(r.cost.specular_sum);
    ld.x.push_back(r.iter);
    ld.y.push_back(r.cost.distance_sum);
  }
  const bool single = h.size() == 1;
  for (PlotSeries* s : {&total, &ls, &ld}) s->markers = single;
  std::vector<PlotPanel> panels;
  panels.push_back({"Total cost", "iteration", "total", {total}, false, {}});
  panels.push_back({"Specular cost (lambda_S = " + fmt("%g", w.lambda_S) + ")", "iteration", "sum of L_S", {ls}, false, {}});
  panels.push_back({"Distance cost (lambda_d = " + fmt("%.3g", w.lambda_d_effective()) + " 1/m^2)", "iteration",
                    "sum of L_d [m^2]", {ld}, false, {}});
  write_svg_plot(out, panels);
}

void write_rtn_svg(std::ostream& out, const ReportBundle& r) {
  auto series = [](const std::vector<TracePoint>& tr, const char* label, const char* color, int ax) {
    PlotSeries s{label, color, {}, {}, {}, false, true};
    for (const auto& p : tr) {
      s.x.push_back(p.rtn_m.y);
      s.y.push_back(ax == 0 ? p.rtn_m.x : p.rtn_m.z);
      s.solid.push_back(p.in_window ? 1 : 0);
    }
    return s;
  };
  PlotPanel rt{"Relative orbit, radial vs along-track (solid: inspection window)", "along-track T [m]",
               "radial R [m]", {}, true, {{0.0, 0.0}}};
  PlotPanel nt{"Relative orbit, cross-track vs along-track", "along-track T [m]", "cross-track N [m]", {}, true,
               {{0.0, 0.0}}};
  rt.series.push_back(series(r.initial_trace, "initial", "black", 0));
  nt.series.push_back(series(r.initial_trace, "initial", "black", 2));
  if (r.has_final) {
    rt.series.push_back(series(r.final_trace, "optimised", "#d62728", 0));
    nt.series.push_back(series(r.final_trace, "optimised", "#d62728", 2));
  }
  write_svg_plot(out, {rt, nt}, 720, 380);
}

void write_saturation_svg(std::ostream& out, const ReportBundle& r) {
  auto series = [](const std::vector<SaturationPoint>& s, const char* label, const char* color) {
    PlotSeries p{label, color, {}, {}, {}, true};
    for (const auto& q : s) {
      p.x.push_back(q.t_s / 60.0);
      p.y.push_back(q.eclipsed ? kNaN : 100.0 * q.saturation);
    }
    return p;
  };
  PlotPanel p{"Saturated pixels on the target (eclipsed snapshots omitted)", "time [min]", "saturated [%]", {}, false, {}};
  p.series.push_back(series(r.initial_saturation, "initial", "black"));
  if (r.has_final) p.series.push_back(series(r.final_saturation, "optimised", "#d62728"));
  write_svg_plot(out, {p});
}

void write_result_dir(const std::string& dir, const Scenario& s, const OptimizationResult& res) {
  const fs::path d(dir);
  std::error_code ec;
  fs::create_directories(d, ec);
  if (ec) throw ConfigError("cannot create '" + dir + "': " + ec.message());

  RunConfig snap = s.config;
  copy_input(s.config.resolve(s.config.target_tle), d / "target_input.tle");
  snap.target_tle = "target_input.tle";
  copy_input(s.config.resolve(s.config.mesh), d / "mesh.obj");
  snap.mesh = "mesh.obj";
  if (!s.config.chaser_tle.empty()) {
    copy_input(s.config.resolve(s.config.chaser_tle), d / "chaser_input.tle");
    snap.chaser_tle = "chaser_input.tle";
  }
  snap.output_dir = ".";
  write_file(d / "config.json", to_json_text(snap));

  std::ostringstream hist;
  write_history_csv(hist, res.history);
  write_file(d / "history.csv", hist.str());
  write_tle_file((d / "initial.tle").string(), res.initial_chaser);
  write_tle_file((d / "optimized.tle").string(), res.final_chaser);

  json j;
  j["iterations"] = res.history.size();
  j["converged"] = res.converged;
  j["aborted"] = res.aborted;
  j["stop_reason"] = res.stop_reason;
  j["initial_total"] = res.initial_cost.total;
  j["final_total"] = res.final_cost.total;
  j["initial_specular_sum"] = res.initial_cost.specular_sum;
  j["final_specular_sum"] = res.final_cost.specular_sum;
  j["initial_distance_sum"] = res.initial_cost.distance_sum;
  j["final_distance_sum"] = res.final_cost.distance_sum;
  j["initial_elements"] = elements_json(res.initial_elements);
  j["final_elements"] = elements_json(res.final_elements);
  json warn = json::array();
  for (const auto& w : res.final_cost.warnings) warn.push_back(w);
  j["final_warnings"] = warn;
  write_file(d / "result.json", j.dump(2) + "\n");

  write_report(dir, (d / "report").string());
}

PersistedResult load_result_dir(const std::string& dir) {
  const fs::path d(dir);
  PersistedResult p;
  p.config = parse_config(read_file(d / "config.json"), d.string());
  json j;
  try {
    j = json::parse(read_file(d / "result.json"));
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("result.json is not valid JSON: ") + e.what());
  }
  if (!j.contains("initial_elements") || !j.contains("final_elements"))
    throw ConfigError("result.json lacks element records");
  p.initial_elements = elements_from_json(j.at("initial_elements"));
  p.final_elements = elements_from_json(j.at("final_elements"));

  std::istringstream hist(read_file(d / "history.csv"));
  std::string line;
  std::getline(hist, line);
  if (line.rfind("iter,total,L_S_sum,L_d_sum", 0) != 0) throw ConfigError("history.csv has an unexpected header");
  int row = 1;
  while (std::getline(hist, line)) {
    ++row;
    if (line.empty()) continue;
    IterationRecord r;
    double v[7];
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf,%lf,%lf,%lf", &r.iter, &v[0], &v[1], &v[2], &v[3], &v[4], &v[5],
                    &v[6]) != 8)
      throw ConfigError("history.csv line " + std::to_string(row) + " is malformed");
    r.cost.total = v[0];
    r.cost.specular_sum = v[1];
    r.cost.distance_sum = v[2];
    r.elements.inclination = v[3];
    r.elements.mean_anomaly = v[4];
    r.elements.eccentricity = v[5];
    r.grad_norm = v[6];
    p.history.push_back(r);
  }
  return p;
}

ReportBundle write_report(const std::string& result_dir, const std::string& out_dir) {
  const PersistedResult p = load_result_dir(result_dir);
  const Scenario s = build_scenario(p.config);
  ReportOptions ro;
  ro.resolution = p.config.report_resolution;
  ReportBundle r = evaluate_report(s.problem, p.initial_elements, p.final_elements, ro);
  r.has_final = !p.history.empty();

  const fs::path d(out_dir);
  std::error_code ec;
  fs::create_directories(d, ec);
  if (ec) throw ConfigError("cannot create '" + out_dir + "': " + ec.message());
  std::ostringstream a, b, c;
  write_cost_history_svg(a, p.history, s.problem.weights);
  write_file(d / "cost_history.svg", a.str());
  write_rtn_svg(b, r);
  write_file(d / "rtn_orbit.svg", b.str());
  write_saturation_svg(c, r);
  write_file(d / "saturation.svg", c.str());
  write_frame(d / "frame_initial.ppm", r.initial_frame, r.full_well);
  if (r.has_final) write_frame(d / "frame_optimized.ppm", r.final_frame, r.full_well);

  std::ostringstream sat;
  sat << "t_s,eclipsed,saturation_initial,saturation_optimized,specular_initial,specular_optimized\n";
  for (std::size_t i = 0; i < r.initial_saturation.size(); ++i) {
    const auto& x = r.initial_saturation[i];
    const auto& y = r.final_saturation[i];
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.12g,%d,%.12g,%.12g,%.12g,%.12g\n", x.t_s, x.eclipsed ? 1 : 0, x.saturation,
                  y.saturation, x.specular, y.specular);
    sat << buf;
  }
  write_file(d / "saturation.csv", sat.str());

  std::ostringstream tr;
  tr << "t_s,in_window,R_initial,T_initial,N_initial,R_optimized,T_optimized,N_optimized\n";
  for (std::size_t i = 0; i < r.initial_trace.size(); ++i) {
    const auto& x = r.initial_trace[i];
    const auto& y = r.final_trace[i];
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.12g,%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", x.t_s, x.in_window ? 1 : 0,
                  x.rtn_m.x, x.rtn_m.y, x.rtn_m.z, y.rtn_m.x, y.rtn_m.y, y.rtn_m.z);
    tr << buf;
  }
  write_file(d / "rtn_trace.csv", tr.str());

  json summary;
  summary["saturation_sum_initial"] = r.saturation_sum(false);
  summary["saturation_sum_optimized"] = r.saturation_sum(true);
  summary["initial_total"] = p.history.empty() ? kNaN : p.history.front().cost.total;
  summary["final_total"] = p.history.empty() ? kNaN : p.history.back().cost.total;
  summary["max_cost_snapshot_initial"] = r.initial_frame.snapshot;
  summary["max_cost_snapshot_optimized"] = r.final_frame.snapshot;
  summary["report_resolution"] = ro.resolution;
  write_file(d / "summary.json", summary.dump(2) + "\n");
  return r;
}

}  // namespace specorb
