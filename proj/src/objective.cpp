#include "specorb/objective.hpp"

namespace specorb {

DistanceConvention distance_convention_from_name(const std::string& name) {
  if (name == "norm") return DistanceConvention::norm;
  if (name == "norm_squared") return DistanceConvention::norm_squared;
  throw ConfigError("unknown distance cost convention '" + name + "' (norm or norm_squared)");
}

const char* distance_convention_name(DistanceConvention c) {
  return c == DistanceConvention::norm_squared ? "norm_squared" : "norm";
}

double TrajectoryProblem::duration_s() const {
  if (window.duration_s > 0.0) return window.duration_s;
  return Sgp4Model<double>::init(target, gravity).period_minutes() * 60.0;
}

std::vector<double> TrajectoryProblem::snapshot_times_s() const {
  if (window.snapshots < 1) throw ConfigError("snapshot count must be at least 1");
  const double T = duration_s();
  std::vector<double> t(static_cast<std::size_t>(window.snapshots) + 1);
  for (int i = 0; i <= window.snapshots; ++i)
    t[static_cast<std::size_t>(i)] = window.start_offset_s + T * i / window.snapshots;
  return t;
}

SnapshotRender render_snapshot(const TrajectoryProblem& pb, const MeanElements<double>& chaser, double t_s,
                               int threads) {
  if (!pb.mesh || !pb.bvh) throw ConfigError("trajectory problem has no target mesh");
  const auto target = Sgp4Model<double>::init(pb.target, pb.gravity);
  const auto model = Sgp4Model<double>::init(chaser, pb.gravity);
  const JulianDate ce = pb.chaser_epoch.value_or(pb.target.epoch);
  const double t_min = t_s / 60.0;
  const StateVector<double> st = target.propagate(t_min);
  const StateVector<double> sc = model.propagate(t_min + pb.target.epoch.days_since(ce) * 1440.0);
  const SunState<double> sun = sun_direction(pb.target.epoch, t_min / 1440.0);
  SnapshotRender out;
  out.t_s = t_s;
  out.eclipsed = is_eclipsed(st.position, sun.direction_teme);
  out.relative_m = relative_position(sc.position, st.position, st.velocity);
  out.light = rtn_frame(st.position, st.velocity) * sun.direction_teme;
  out.degenerate_view = norm(out.relative_m) < 1e-6;
  if (out.degenerate_view) return out;
  const CameraPose<double> cam =
      look_at(out.relative_m, Vec3d{}, pb.camera.up_hint, pb.camera.fov_deg, pb.camera.width, pb.camera.height);
  RenderOptions ro;
  ro.threads = threads;
  out.buffers = render(Scene{pb.mesh, pb.bvh}, cam, out.light, pb.shading, ro);
  if (out.eclipsed) {
    std::fill(out.buffers.lit.begin(), out.buffers.lit.end(), std::uint8_t{0});
    std::fill(out.buffers.intensity.begin(), out.buffers.intensity.end(), 0.0);
  }
  return out;
}

}  // namespace specorb
