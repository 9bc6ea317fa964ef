#pragma once

// Specular and distance costs and their weighted sum over an inspection window.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "specorb/autodiff.hpp"
#include "specorb/ephemeris.hpp"
#include "specorb/geometry.hpp"
#include "specorb/imaging.hpp"
#include "specorb/kernels.hpp"
#include "specorb/propagator.hpp"
#include "specorb/tle.hpp"

namespace specorb {

enum class DistanceConvention { norm, norm_squared };

DistanceConvention distance_convention_from_name(const std::string& name);
const char* distance_convention_name(DistanceConvention c);

struct CostWeights {
  double lambda_S = 1.0;
  double lambda_d = -1.0;  // < 0 selects 1 / d^2
  double d = 100.0;        // m
  DistanceConvention convention = DistanceConvention::norm;

  double lambda_d_effective() const { return lambda_d >= 0.0 ? lambda_d : 1.0 / (d * d); }
};

/// Phong specular cost: mean over masked pixels of max(0, w_r . v)^alpha,
/// with v pointing from the surface toward the camera. Only sunlit pixels
/// contribute a reflection; the mask itself is detached.
template <Scalar T>
T specular_cost(const RenderBuffers<T>& b, const Vec3d& light, bool* empty_mask = nullptr) {
  const std::size_t masked = b.mask_count();
  if (empty_mask) *empty_mask = masked == 0;
  if (masked == 0) return T(0.0);
  constexpr std::size_t K = slots_v<T>;

  std::vector<double> alphas;
  for (std::size_t p = 0; p < b.size(); ++p)
    if (b.mask[p] && b.lit[p]) alphas.push_back(b.alpha[p]);
  std::sort(alphas.begin(), alphas.end());
  alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());

  const Vec3<T> l = lift<T>(light);
  const auto& kern = kernels::active();
  double total = 0.0;
  std::array<double, (K > 0 ? K : 1)> grad{};
  std::vector<double> x, dx;
  for (double a : alphas) {
    x.clear();
    std::vector<T> terms;
    for (std::size_t p = 0; p < b.size(); ++p) {
      if (!b.mask[p] || !b.lit[p] || b.alpha[p] != a) continue;
      terms.push_back(dot(reflection_vector(l, b.normal[p]), -b.ray_dir[p]));
      x.push_back(value_of(terms.back()));
    }
    const std::size_t n = x.size();
    dx.assign(K * n, 0.0);
    if constexpr (K > 0)
      for (std::size_t q = 0; q < n; ++q)
        for (std::size_t k = 0; k < K; ++k) dx[k * n + q] = terms[q].grad[k];
    std::array<double, (K > 0 ? K : 1)> g{};
    total += kern.clamped_pow_sum(x.data(), dx.data(), n, K, a, g.data());
    for (std::size_t k = 0; k < K; ++k) grad[k] += g[k];
  }
  const double inv = 1.0 / static_cast<double>(masked);
  T out(total * inv);
  if constexpr (K > 0)
    for (std::size_t k = 0; k < K; ++k) out.grad[k] = grad[k] * inv;
  return out;
}

/// Distance regulariser in m^2: (|r_c - r_t| - d)^2 with the separation in
/// metres, or (|r_c - r_t|^2 - d)^2 under the norm_squared convention.
template <Scalar T>
T distance_cost(const Vec3<T>& r_c_km, const Vec3d& r_t_km, double d_m,
                DistanceConvention c = DistanceConvention::norm) {
  const Vec3<T> diff = 1000.0 * (r_c_km - lift<T>(r_t_km));
  const T sq = dot(diff, diff);
  if (c == DistanceConvention::norm_squared) {
    const T e = sq - d_m;
    return e * e;
  }
  using std::sqrt;
  const T e = sqrt(sq) - d_m;
  return e * e;
}

struct InspectionWindow {
  double duration_s = 0.0;  // <= 0 selects one target orbital period
  int snapshots = 16;       // N; times i*T/N for i = 0..N
  double start_offset_s = 0.0;
};

struct CameraSettings {
  int width = 64;
  int height = 64;
  double fov_deg = 10.0;
  Vec3d up_hint{1.0, 0.0, 0.0};
};

/// Everything the cost needs apart from the chaser elements.
struct TrajectoryProblem {
  MeanElements<double> target;
  GravityModel gravity = GravityModel::wgs72;
  std::optional<JulianDate> chaser_epoch;  // defaults to the target epoch
  const TriangleMesh* mesh = nullptr;
  const Bvh* bvh = nullptr;
  ShadingParams shading;
  CostWeights weights;
  InspectionWindow window;
  CameraSettings camera;
  int threads = 1;

  double duration_s() const;
  std::vector<double> snapshot_times_s() const;
};

struct SnapshotCost {
  double t_s = 0.0;
  bool eclipsed = false;
  bool empty_mask = false;
  bool degenerate_view = false;
  double specular = 0.0;
  double distance = 0.0;
  double weighted = 0.0;  // lambda_S * specular + lambda_d * distance
  double separation_m = 0.0;
  double saturation = 0.0;
  std::size_t masked_pixels = 0;
  Vec3d relative_m;
};

struct CostBreakdown {
  std::vector<SnapshotCost> snapshots;
  double specular_sum = 0.0;
  double distance_sum = 0.0;
  double total = 0.0;
  std::vector<double> grad_total;  // K entries (empty for plain evaluation)
  std::vector<std::string> warnings;
};

struct EvaluationOptions {
  /// Per-snapshot visibility to reuse (frozen), or nullptr.
  const std::vector<Visibility>* frozen = nullptr;
  /// Receives per-snapshot visibility of this evaluation.
  std::vector<Visibility>* visibility_out = nullptr;
};

namespace detail {

template <Scalar T>
struct SnapshotEval {
  SnapshotCost info;
  T specular{};
  T distance{};
  Visibility visibility;
};

template <Scalar T>
SnapshotEval<T> evaluate_snapshot(const TrajectoryProblem& pb, const Sgp4Model<double>& target,
                                  const Sgp4Model<T>& chaser, double chaser_offset_min, double t_s,
                                  const Visibility* frozen) {
  SnapshotEval<T> out;
  out.info.t_s = t_s;
  const double t_min = t_s / 60.0;
  const StateVector<double> st = target.propagate(t_min);
  const StateVector<T> sc = chaser.propagate(t_min + chaser_offset_min);
  const SunState<double> sun = sun_direction(pb.target.epoch, t_min / 1440.0);
  out.info.eclipsed = is_eclipsed(st.position, sun.direction_teme);

  const Mat3d q = rtn_frame(st.position, st.velocity);
  const Vec3<T> eye = relative_position(sc.position, st.position, st.velocity);
  out.info.relative_m = value_of(eye);
  out.info.separation_m = norm(out.info.relative_m);
  out.distance = distance_cost(sc.position, st.position, pb.weights.d, pb.weights.convention);
  out.specular = T(0.0);
  if (out.info.eclipsed) return out;
  if (out.info.separation_m < 1e-6) {
    out.info.degenerate_view = true;
    return out;
  }
  const Vec3d light = q * sun.direction_teme;
  const CameraPose<T> cam = look_at(eye, Vec3d{}, pb.camera.up_hint, pb.camera.fov_deg,
                                    pb.camera.width, pb.camera.height);
  RenderOptions ro;
  ro.frozen = frozen;
  const RenderBuffers<T> buf = render(Scene{pb.mesh, pb.bvh}, cam, light, pb.shading, ro);
  bool empty = false;
  out.specular = specular_cost(buf, light, &empty);
  out.info.empty_mask = empty;
  out.info.masked_pixels = buf.mask_count();
  out.info.saturation = saturation_fraction(buf, pb.shading.full_well_intensity());
  out.visibility = buf.visibility();
  return out;
}

}  // namespace detail

/// Weighted cost over the inspection window. Snapshots run concurrently up
/// to `problem.threads`; accumulation is always in ascending time order.
template <Scalar T>
CostBreakdown trajectory_cost(const TrajectoryProblem& pb, const MeanElements<T>& chaser,
                              const EvaluationOptions& opt = {}) {
  if (!pb.mesh || !pb.bvh) throw ConfigError("trajectory problem has no target mesh");
  if (pb.window.snapshots < 1) throw ConfigError("snapshot count must be at least 1");
  const auto target = Sgp4Model<double>::init(pb.target, pb.gravity);
  const auto model = Sgp4Model<T>::init(chaser, pb.gravity);
  const JulianDate ce = pb.chaser_epoch.value_or(pb.target.epoch);
  const double offset_min = pb.target.epoch.days_since(ce) * 1440.0;
  const std::vector<double> times = pb.snapshot_times_s();
  if (opt.frozen && opt.frozen->size() != times.size())
    throw ConfigError("frozen visibility does not match the snapshot count");

  std::vector<std::optional<detail::SnapshotEval<T>>> evals(times.size());
  std::vector<std::exception_ptr> errors(times.size());
  auto work = [&](std::size_t i) {
    try {
      const Visibility* fz = opt.frozen ? &(*opt.frozen)[i] : nullptr;
      evals[i] = detail::evaluate_snapshot<T>(pb, target, model, offset_min, times[i], fz);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t threads =
      std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(1, pb.threads)),
                                                     times.size()));
  if (threads == 1) {
    for (std::size_t i = 0; i < times.size(); ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < times.size(); i += threads) work(i);
      });
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  CostBreakdown out;
  const double ls = pb.weights.lambda_S;
  const double ld = pb.weights.lambda_d_effective();
  T total(0.0);
  for (std::size_t i = 0; i < times.size(); ++i) {
    auto& ev = *evals[i];
    const T weighted = ls * ev.specular + ld * ev.distance;
    ev.info.specular = value_of(ev.specular);
    ev.info.distance = value_of(ev.distance);
    ev.info.weighted = value_of(weighted);
    total = total + weighted;
    out.specular_sum += ev.info.specular;
    out.distance_sum += ev.info.distance;
    if (ev.info.degenerate_view)
      out.warnings.push_back("snapshot " + std::to_string(i) + ": chaser coincides with target");
    if (ev.info.empty_mask)
      out.warnings.push_back("snapshot " + std::to_string(i) + ": target not visible");
    out.snapshots.push_back(ev.info);
    if (opt.visibility_out) opt.visibility_out->push_back(std::move(ev.visibility));
  }
  out.total = value_of(total);
  for (double g : gradient_of(total)) out.grad_total.push_back(g);
  return out;
}

struct SnapshotRender {
  double t_s = 0.0;
  bool eclipsed = false;
  bool degenerate_view = false;
  Vec3d relative_m;
  Vec3d light;  // render frame
  RenderBuffers<double> buffers;  // empty for a degenerate view; unlit and dark in eclipse
};

/// Primal render of the chaser's view at `t_s` after the target epoch.
SnapshotRender render_snapshot(const TrajectoryProblem& problem, const MeanElements<double>& chaser, double t_s,
                               int threads = 1);

}  // namespace specorb
