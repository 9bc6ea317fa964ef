// specorb command-line front end.

#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "specorb/config.hpp"
#include "specorb/kernels.hpp"
#include "specorb/optimizer.hpp"
#include "specorb/report.hpp"
#include "specorb/scenario.hpp"

namespace fs = std::filesystem;
using namespace specorb;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kConfig = 2, kNumeric = 3, kThreshold = 4 };

std::atomic<bool> g_cancel{false};

extern "C" void on_sigint(int) { g_cancel.store(true); }

struct Overrides {
  std::string config;
  std::string out;
  std::optional<int> threads;
  std::optional<int> iterations;
  std::optional<int> resolution;
};

RunConfig load_with_overrides(const Overrides& o) {
  RunConfig c = load_config(o.config);
  if (o.threads) c.threads = *o.threads;
  if (o.iterations) c.iterations = *o.iterations;
  if (o.resolution) c.resolution = *o.resolution;
  return c;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + p.string() + "'");
  f << s;
}

void make_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ConfigError("cannot create '" + p.string() + "': " + ec.message());
}

Tle first_tle(const std::string& path) {
  const auto v = read_tle_file(path);
  if (v.empty()) throw ConfigError("no element set in '" + path + "'");
  return v.front();
}

// Absolute paths so the snapshot stays usable from any directory.
std::string absolute_config(RunConfig c) {
  c.target_tle = fs::absolute(c.resolve(c.target_tle)).string();
  c.mesh = fs::absolute(c.resolve(c.mesh)).string();
  if (!c.chaser_tle.empty()) c.chaser_tle = fs::absolute(c.resolve(c.chaser_tle)).string();
  return to_json_text(c);
}

int cmd_validate(const std::string& tle_path, const std::string& ref_path, double threshold,
                 const std::string& out) {
  const Tle tle = first_tle(tle_path);
  std::ifstream in(ref_path);
  if (!in) throw ConfigError("cannot read '" + ref_path + "'");
  const auto ref = read_ephemeris_csv(in);
  if (ref.empty()) throw ConfigError("reference ephemeris '" + ref_path + "' is empty");
  const auto model = Sgp4Model<double>::init(elements_from_tle(tle));

  std::ostringstream rows;
  rows << "t_min,dr_km,dv_km_s\n";
  double max_dr = 0.0, sum_sq = 0.0, max_dv = 0.0, t_at_max = 0.0;
  for (const auto& r : ref) {
    const StateVector<double> s = model.propagate(r.t_min);
    const double dr = norm(s.position - r.position);
    const double dv = norm(s.velocity - r.velocity);
    if (dr > max_dr) max_dr = dr, t_at_max = r.t_min;
    max_dv = std::max(max_dv, dv);
    sum_sq += dr * dr;
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.12g,%.6e,%.6e\n", r.t_min, dr, dv);
    rows << buf;
  }
  const double rms = std::sqrt(sum_sq / static_cast<double>(ref.size()));
  if (!out.empty()) write_text(out, rows.str());
  std::printf("satellite %s: %zu reference points\n", tle.catalog_number.c_str(), ref.size());
  std::printf("max position deviation %.3e km at t = %g min\n", max_dr, t_at_max);
  std::printf("rms position deviation %.3e km\n", rms);
  std::printf("max velocity deviation %.3e km/s\n", max_dv);
  if (max_dr > threshold) {
    std::printf("FAIL: max deviation exceeds %.3e km\n", threshold);
    return kThreshold;
  }
  std::printf("ok: within %.3e km\n", threshold);
  return kOk;
}

int cmd_ephemeris(const std::string& tle_path, double start, double stop, double step, const std::string& out) {
  if (!(step > 0.0) || stop < start) throw ConfigError("ephemeris grid needs step > 0 and stop >= start");
  const Tle tle = first_tle(tle_path);
  const auto model = Sgp4Model<double>::init(elements_from_tle(tle));
  std::vector<StateVector<double>> states;
  const long n = std::lround(std::floor((stop - start) / step + 1e-9));
  for (long k = 0; k <= n; ++k) states.push_back(model.propagate(start + static_cast<double>(k) * step));
  if (out.empty()) {
    write_ephemeris_csv(std::cout, states);
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + out + "'");
    write_ephemeris_csv(f, states);
  }
  return kOk;
}

int cmd_render(const Overrides& o, double t_s, const std::string& chaser_path) {
  RunConfig c = load_with_overrides(o);
  Scenario s = build_scenario(c);
  Tle chaser = s.chaser;
  if (!chaser_path.empty()) chaser = first_tle(chaser_path);
  TrajectoryProblem pb = s.problem;
  if (!(chaser.epoch == s.target.epoch))
    pb.chaser_epoch = chaser.epoch;
  else
    pb.chaser_epoch.reset();
  const MeanElements<double> e = elements_from_tle(chaser);

  const SnapshotRender r = render_snapshot(pb, e, t_s, c.threads);
  const fs::path dir(o.out.empty() ? "render" : o.out);
  make_dir(dir);
  const int w = pb.camera.width, h = pb.camera.height;
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  const bool drawn = r.buffers.size() == n;
  const std::vector<double> intensity = drawn ? r.buffers.intensity : std::vector<double>(n, 0.0);
  const std::vector<std::uint8_t> mask = drawn ? r.buffers.mask : std::vector<std::uint8_t>(n, 0);
  const double fw = pb.shading.full_well_intensity();

  std::ostringstream ppm, mppm, csv;
  write_ppm(ppm, w, h, intensity, fw);
  write_mask_ppm(mppm, w, h, mask);
  write_intensity_csv(csv, w, h, intensity);
  write_text(dir / "frame.ppm", ppm.str());
  write_text(dir / "mask.ppm", mppm.str());
  write_text(dir / "intensity.csv", csv.str());

  std::size_t masked = 0;
  for (auto m : mask) masked += m;
  json meta;
  meta["t_s"] = t_s;
  meta["eclipsed"] = r.eclipsed;
  meta["degenerate_view"] = r.degenerate_view;
  meta["width"] = w;
  meta["height"] = h;
  meta["relative_rtn_m"] = {r.relative_m.x, r.relative_m.y, r.relative_m.z};
  meta["light_rtn"] = {r.light.x, r.light.y, r.light.z};
  meta["mask_fraction"] = static_cast<double>(masked) / static_cast<double>(n);
  meta["saturation"] = drawn ? saturation_fraction(r.buffers, fw) : 0.0;
  meta["specular_cost"] = drawn ? specular_cost(r.buffers, r.light) : 0.0;
  meta["full_well"] = fw;
  write_text(dir / "frame.json", meta.dump(2) + "\n");
  write_text(dir / "config.json", absolute_config(c));

  std::printf("t = %g s: %s, mask %.2f%%, wrote %s\n", t_s,
              r.eclipsed ? "eclipsed" : (r.degenerate_view ? "degenerate view" : "sunlit"),
              100.0 * meta["mask_fraction"].get<double>(), dir.string().c_str());
  return kOk;
}

int print_audit(const GradientAudit& a, double tol, const fs::path& csv) {
  std::ostringstream o;
  o << "variable,step,dual,fd_frozen,fd_plain,rel_error,visibility_changed\n";
  std::printf("gradient audit, total cost %.9g\n", a.total);
  std::printf("  %-13s %14s %14s %14s %10s\n", "variable", "dual", "fd (frozen)", "fd (plain)", "rel err");
  for (const auto& e : a.entries) {
    std::printf("  %-13s %14.6e %14.6e %14.6e %10.2e%s\n", element_name(e.variable), e.dual, e.fd_frozen, e.fd_plain,
                e.rel_error, e.visibility_changed ? "  (visibility changed)" : "");
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%.6g,%.12g,%.12g,%.12g,%.6e,%d\n", element_name(e.variable), e.step, e.dual,
                  e.fd_frozen, e.fd_plain, e.rel_error, e.visibility_changed ? 1 : 0);
    o << buf;
  }
  write_text(csv, o.str());
  if (a.max_rel_error() > tol) {
    std::printf("FAIL: gradient audit error %.2e exceeds %.2e\n", a.max_rel_error(), tol);
    return kThreshold;
  }
  std::printf("gradient audit ok (max rel error %.2e)\n", a.max_rel_error());
  return kOk;
}

int cmd_optimize(const Overrides& o, bool audit, double audit_tol, bool quiet) {
  RunConfig c = load_with_overrides(o);
  if (!o.out.empty()) c.output_dir = o.out;
  const fs::path dir = c.resolve(c.output_dir);
  Scenario s = build_scenario(c);
  make_dir(dir);

  if (audit) {
    const int rc = print_audit(audit_cost_gradient(s.problem, elements_from_tle(s.chaser), s.optimizer.variables),
                               audit_tol, dir / "gradient_audit.csv");
    if (rc != kOk) return rc;
  }

  std::signal(SIGINT, on_sigint);
  s.optimizer.cancel = &g_cancel;
  const auto t0 = std::chrono::steady_clock::now();
  const OptimizationResult res = optimize(s.problem, s.chaser, s.optimizer, [&](const IterationRecord& r) {
    if (quiet) return;
    if (r.iter % 10 == 0)
      std::printf("iter %4d  total %.6e  L_S %.6e  L_d %.6e  |g| %.3e\n", r.iter, r.cost.total, r.cost.specular_sum,
                  r.cost.distance_sum, r.grad_norm);
    std::fflush(stdout);
  });
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_result_dir(dir.string(), s, res);

  std::printf("%zu iterations in %.1f s (%s)\n", res.history.size(), secs, res.stop_reason.c_str());
  std::printf("total cost    %.6e -> %.6e\n", res.initial_cost.total, res.final_cost.total);
  std::printf("specular sum  %.6e -> %.6e\n", res.initial_cost.specular_sum, res.final_cost.specular_sum);
  std::printf("distance sum  %.6e -> %.6e\n", res.initial_cost.distance_sum, res.final_cost.distance_sum);
  for (const auto& w : res.final_cost.warnings) std::printf("warning: %s\n", w.c_str());
  std::printf("results in %s\n", dir.string().c_str());
  return res.aborted ? kNumeric : kOk;
}

int cmd_report(const std::string& result_dir, const std::string& out, bool require_decrease) {
  const std::string dest = out.empty() ? (fs::path(result_dir) / "report").string() : out;
  const ReportBundle r = write_report(result_dir, dest);
  const PersistedResult p = load_result_dir(result_dir);
  std::printf("report written to %s\n", dest.c_str());
  std::printf("saturation sum %.4f -> %.4f\n", r.saturation_sum(false), r.saturation_sum(true));
  if (p.history.empty()) {
    std::printf("initial orbit only (no iterations)\n");
    return kOk;
  }
  const double a = p.history.front().cost.total, b = p.history.back().cost.total;
  const bool dec = b < a;
  std::printf("total cost %.6e -> %.6e: %s\n", a, b, dec ? "decreased" : "not decreased");
  return require_decrease && !dec ? kThreshold : kOk;
}

int cmd_scenario(const std::string& out) {
  make_dir(out);
  write_default_scenario(out);
  std::printf("wrote scenario.json, target.tle and panel_satellite.obj to %s\n", out.c_str());
  return kOk;
}

void add_common(CLI::App* sub, Overrides& o, bool iterations) {
  sub->add_option("--config", o.config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--threads", o.threads, "worker threads")->check(CLI::Range(1, 256));
  if (iterations) sub->add_option("--iterations", o.iterations, "optimiser iterations")->check(CLI::NonNegativeNumber);
  sub->add_option("--resolution", o.resolution, "image width and height in pixels")->check(CLI::Range(1, 8192));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inspection trajectory design with an image specular cost"};
  app.require_subcommand(1);
  bool show_kernel = false;
  app.add_flag("--kernel-info", show_kernel, "print the active SIMD kernel variant");

  std::string tle, ref, out_csv;
  double threshold = 1e-4;
  auto* v = app.add_subcommand("validate", "compare propagation against a reference ephemeris");
  v->add_option("--tle", tle, "TLE file (first element set is used)")->required()->check(CLI::ExistingFile);
  v->add_option("--reference", ref, "reference ephemeris CSV")->required()->check(CLI::ExistingFile);
  v->add_option("--threshold", threshold, "maximum position deviation in km")->capture_default_str();
  v->add_option("--out", out_csv, "per-point deviation CSV");

  std::string etle, eout;
  double start = 0.0, stop = 1440.0, step = 1.0;
  auto* e = app.add_subcommand("ephemeris", "write an ephemeris CSV");
  e->add_option("--tle", etle, "TLE file")->required()->check(CLI::ExistingFile);
  e->add_option("--start", start, "minutes since epoch")->capture_default_str();
  e->add_option("--stop", stop, "minutes since epoch")->capture_default_str();
  e->add_option("--step", step, "minutes")->capture_default_str();
  e->add_option("--out", eout, "output CSV (stdout if absent)");

  Overrides ro;
  double t_s = 0.0;
  std::string chaser;
  auto* r = app.add_subcommand("render", "render the chaser view of the target at one time");
  add_common(r, ro, false);
  r->add_option("--time", t_s, "seconds after the target epoch")->capture_default_str();
  r->add_option("--chaser", chaser, "chaser TLE (default: from the config)")->check(CLI::ExistingFile);

  Overrides oo;
  bool audit = false, quiet = false;
  double audit_tol = 1e-2;
  auto* o = app.add_subcommand("optimize", "optimise the chaser elements and write a result directory");
  add_common(o, oo, true);
  o->add_flag("--seedless-check", audit, "audit dual gradients against finite differences first");
  o->add_option("--audit-tolerance", audit_tol, "relative tolerance of the audit")->capture_default_str();
  o->add_flag("--quiet", quiet, "no per-iteration output");

  std::string result_dir, rep_out;
  bool require_decrease = false;
  auto* p = app.add_subcommand("report", "regenerate plots and frames of a result directory");
  p->add_option("result", result_dir, "result directory")->required()->check(CLI::ExistingDirectory);
  p->add_option("--out", rep_out, "output directory (default: <result>/report)");
  p->add_flag("--require-decrease", require_decrease, "exit 4 unless the final total cost is below the initial");

  std::string scen_out = "scenario";
  auto* sc = app.add_subcommand("scenario", "write the shipped panel-satellite scenario");
  sc->add_option("--out", scen_out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kOk : kConfig;
  }
  if (show_kernel) std::fprintf(stderr, "kernel: %s\n", kernels::active().name);

  try {
    if (*v) return cmd_validate(tle, ref, threshold, out_csv);
    if (*e) return cmd_ephemeris(etle, start, stop, step, eout);
    if (*r) return cmd_render(ro, t_s, chaser);
    if (*o) return cmd_optimize(oo, audit, audit_tol, quiet);
    if (*p) return cmd_report(result_dir, rep_out, require_decrease);
    if (*sc) return cmd_scenario(scen_out);
  } catch (const ConfigError& err) {
    std::fprintf(stderr, "config error: %s\n", err.what());
    return kConfig;
  } catch (const NumericError& err) {
    std::fprintf(stderr, "numeric error: %s\n", err.what());
    return kNumeric;
  } catch (const Error& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kNumeric;
  }
  return kOk;
}
