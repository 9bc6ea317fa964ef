#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "meshes.hpp"
#include "scenario_fixture.hpp"
#include "specorb/objective.hpp"
#include "specorb/optimizer.hpp"

using namespace specorb;
using D3 = Dual<3>;

namespace {

Vec3d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return normalized(Vec3d{g(rng), g(rng), g(rng)});
}

// n pixels, all masked and lit, each with the given w_r . v.
RenderBuffers<double> pixels_with_cosines(const std::vector<double>& c, double alpha, const Vec3d& light) {
  RenderBuffers<double> b;
  b.width = static_cast<int>(c.size());
  b.height = 1;
  const std::size_t n = c.size();
  b.mask.assign(n, 1);
  b.lit.assign(n, 1);
  b.triangle.assign(n, 0);
  b.alpha.assign(n, alpha);
  b.intensity.assign(n, 0.0);
  b.normal.assign(n, Vec3d{0, 0, 1});
  b.ray_dir.resize(n);
  // light in the x-z plane, normal +z: w_r = (-lx, 0, lz); pick v in the x-z plane
  const Vec3d wr = reflection_vector(light, Vec3d{0, 0, 1});
  const Vec3d perp = normalized(cross(wr, Vec3d{0, 1, 0}));
  for (std::size_t p = 0; p < n; ++p) {
    const double s = std::sqrt(std::max(0.0, 1.0 - c[p] * c[p]));
    const Vec3d v = c[p] * wr + s * perp;  // toward the camera
    b.ray_dir[p] = -v;
  }
  return b;
}

// Frozen-visibility central difference of the total cost.
double fd_frozen(const TrajectoryProblem& pb, MeanElements<double> e, ElementId id, double h,
                 const std::vector<Visibility>& vis) {
  EvaluationOptions o;
  o.frozen = &vis;
  const double x = e[id];
  e[id] = x + h;
  const double up = trajectory_cost(pb, e, o).total;
  e[id] = x - h;
  const double dn = trajectory_cost(pb, e, o).total;
  return (up - dn) / (2.0 * h);
}

double fd_plain(const TrajectoryProblem& pb, MeanElements<double> e, ElementId id, double h) {
  const double x = e[id];
  e[id] = x + h;
  const double up = trajectory_cost(pb, e).total;
  e[id] = x - h;
  const double dn = trajectory_cost(pb, e).total;
  return (up - dn) / (2.0 * h);
}

double rel(double a, double b) {
  const double m = std::max(std::fabs(a), std::fabs(b));
  return m == 0.0 ? 0.0 : std::fabs(a - b) / m;
}

}  // namespace

TEST_CASE("reflection vector examples") {
  const Vec3d n{0, 0, 1};
  const Vec3d retro = reflection_vector(n, n);
  CHECK(norm(retro - n) <= 1e-12);

  const Vec3d l{1, 0, 0};
  CHECK(norm(reflection_vector(l, n) - Vec3d{-1, 0, 0}) <= 1e-12);

  const double r = 1.0 / std::sqrt(2.0);
  const Vec3d w = reflection_vector(Vec3d{r, 0, r}, n);
  CHECK(std::fabs(w.x + r) <= 1e-12);
  CHECK(std::fabs(w.y) <= 1e-12);
  CHECK(std::fabs(w.z - r) <= 1e-12);
}

TEST_CASE("mirror law on random unit vectors") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 10000; ++k) {
    const Vec3d l = random_unit(rng), n = random_unit(rng);
    const Vec3d w = reflection_vector(l, n);
    CHECK(std::fabs(norm(w) - 1.0) <= 1e-12);
    CHECK(std::fabs(dot(w, n) - dot(l, n)) <= 1e-12);
  }
}

TEST_CASE("reflection vector carries dual gradients") {
  const Vec3<D3> l{seed<3>(0.6, 0), seed<3>(0.0, 1), seed<3>(0.8, 2)};
  const Vec3<D3> n = lift<D3>(Vec3d{0, 0, 1});
  const Vec3<D3> w = reflection_vector(l, n);
  // w = (-lx, -ly, lz) for n = z
  CHECK(w.x.grad[0] == doctest::Approx(-1.0));
  CHECK(w.y.grad[1] == doctest::Approx(-1.0));
  CHECK(w.z.grad[2] == doctest::Approx(1.0));
}

TEST_CASE("specular cost examples") {
  const double r = 1.0 / std::sqrt(2.0);
  const Vec3d light{r, 0, r};

  const auto aligned = pixels_with_cosines({1.0}, 2.0, light);
  CHECK(specular_cost(aligned, light) == doctest::Approx(1.0).epsilon(1e-12));

  const auto half = pixels_with_cosines({0.5}, 2.0, light);
  CHECK(specular_cost(half, light) == doctest::Approx(0.25).epsilon(1e-12));

  const auto away = pixels_with_cosines({0.0, -0.3, -1.0}, 2.0, light);
  CHECK(specular_cost(away, light) == 0.0);

  // unlit pixels count in the mask but not the numerator
  auto mixed = pixels_with_cosines({1.0, 1.0}, 2.0, light);
  mixed.lit[1] = 0;
  CHECK(specular_cost(mixed, light) == doctest::Approx(0.5).epsilon(1e-12));

  RenderBuffers<double> empty = pixels_with_cosines({1.0}, 2.0, light);
  empty.mask[0] = 0;
  bool flagged = false;
  CHECK(specular_cost(empty, light, &flagged) == 0.0);
  CHECK(flagged);
}

TEST_CASE("specular cost groups pixels by exponent") {
  const double r = 1.0 / std::sqrt(2.0);
  const Vec3d light{r, 0, r};
  auto b = pixels_with_cosines({0.5, 0.5, 0.9}, 2.0, light);
  b.alpha[1] = 16.0;
  const double expect = (0.25 + std::pow(0.5, 16.0) + 0.81) / 3.0;
  CHECK(specular_cost(b, light) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("specular cost is a permutation-invariant average in [0, 1]") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double r = 1.0 / std::sqrt(2.0);
  const Vec3d light{r, 0, r};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> c(97);
    for (auto& x : c) x = u(rng);
    auto b = pixels_with_cosines(c, 2.0 + trial % 5, light);
    for (std::size_t p = 0; p < c.size(); p += 7) b.lit[p] = 0;
    const double base = specular_cost(b, light);
    CHECK(base >= 0.0);
    CHECK(base <= 1.0);

    std::vector<std::size_t> perm(c.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    RenderBuffers<double> q = b;
    for (std::size_t p = 0; p < perm.size(); ++p) {
      q.lit[p] = b.lit[perm[p]];
      q.alpha[p] = b.alpha[perm[p]];
      q.ray_dir[p] = b.ray_dir[perm[p]];
    }
    CHECK(specular_cost(q, light) == doctest::Approx(base).epsilon(1e-13));
  }
}

TEST_CASE("specular cost of rendered scenes stays in [0, 1]") {
  const TriangleMesh mesh = parse_obj(testdata::random_soup_obj(60, 3));
  const Bvh bvh(mesh);
  std::mt19937_64 rng(17);
  ShadingParams sp;
  sp.alpha = 2.0;
  for (int k = 0; k < 300; ++k) {
    const Vec3d eye = 25.0 * random_unit(rng);
    const Vec3d light = random_unit(rng);
    const auto cam = look_at(eye, Vec3d{}, Vec3d{0, 0, 1}, 30.0, 16, 16);
    const auto b = render(Scene{&mesh, &bvh}, cam, light, sp);
    const double s = specular_cost(b, light);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("distance cost examples") {
  const Vec3d rt{7000.0, 0.0, 0.0};
  CHECK(distance_cost<double>(rt + Vec3d{0.0, 0.05, 0.0}, rt, 50.0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(distance_cost<double>(rt + Vec3d{0.0, 0.06, 0.0}, rt, 50.0) == doctest::Approx(100.0).epsilon(1e-9));
  CHECK(distance_cost<double>(rt, rt, 50.0) == doctest::Approx(2500.0));
  // squared convention compares |dr|^2 against d
  CHECK(distance_cost<double>(rt + Vec3d{0.0, 0.01, 0.0}, rt, 50.0, DistanceConvention::norm_squared) ==
        doctest::Approx(2500.0).epsilon(1e-9));

  CHECK(distance_convention_from_name("norm") == DistanceConvention::norm);
  CHECK(distance_convention_from_name("norm_squared") == DistanceConvention::norm_squared);
  CHECK(std::string(distance_convention_name(DistanceConvention::norm_squared)) == "norm_squared");
  CHECK_THROWS_AS(distance_convention_from_name("cubed"), ConfigError);
}

TEST_CASE("distance cost gradient matches central differences") {
  const Vec3d rt{6800.0, 1200.0, -300.0};
  const Vec3d rc{6800.031, 1200.042, -300.017};
  for (auto conv : {DistanceConvention::norm, DistanceConvention::norm_squared}) {
    const double d = 40.0;
    const Vec3<D3> x{seed<3>(rc.x, 0), seed<3>(rc.y, 1), seed<3>(rc.z, 2)};
    const D3 f = distance_cost(x, rt, d, conv);
    for (int k = 0; k < 3; ++k) {
      const double h = 1e-5;  // km
      Vec3d up = rc, dn = rc;
      up[k] += h;
      dn[k] -= h;
      const double fd = (distance_cost<double>(up, rt, d, conv) - distance_cost<double>(dn, rt, d, conv)) / (2 * h);
      CHECK(rel(f.grad[static_cast<std::size_t>(k)], fd) < 1e-6);
    }
  }
}

TEST_CASE("cost weights") {
  CostWeights w;
  w.d = 200.0;
  CHECK(w.lambda_d_effective() == doctest::Approx(1.0 / 40000.0));
  w.lambda_d = 0.5;
  CHECK(w.lambda_d_effective() == 0.5);
}

TEST_CASE("snapshot grid") {
  const Scenario s = build_scenario(testdata::shipped_config());
  TrajectoryProblem pb = s.problem;
  const double period = Sgp4Model<double>::init(pb.target).period_minutes() * 60.0;
  CHECK(pb.duration_s() == doctest::Approx(period));
  const auto t = pb.snapshot_times_s();
  REQUIRE(t.size() == 17);
  CHECK(t.front() == 0.0);
  CHECK(t.back() == doctest::Approx(period));
  pb.window = {600.0, 4, 30.0};
  const auto u = pb.snapshot_times_s();
  REQUIRE(u.size() == 5);
  CHECK(u[2] == doctest::Approx(330.0));
}

TEST_CASE("identical orbits give d squared and a degenerate-view warning") {
  const Scenario s = build_scenario(testdata::shipped_config());
  TrajectoryProblem pb = s.problem;
  pb.window = {600.0, 1, 3000.0};  // sunlit part of the orbit
  const CostBreakdown c = trajectory_cost(pb, pb.target);
  REQUIRE(c.snapshots.size() == 2);
  for (const auto& snap : c.snapshots) {
    CHECK_FALSE(snap.eclipsed);
    CHECK(snap.degenerate_view);
    CHECK(snap.specular == 0.0);
    CHECK(snap.distance == doctest::Approx(pb.weights.d * pb.weights.d));
  }
  CHECK(c.warnings.size() == 2);
  CHECK(c.warnings[0].find("coincides") != std::string::npos);
}

TEST_CASE("an eclipsed window keeps only the distance term") {
  const Scenario s = build_scenario(testdata::shipped_config());
  TrajectoryProblem pb = s.problem;
  pb.window = {1200.0, 4, 0.0};
  const MeanElements<double> e = elements_from_tle(s.chaser);
  const CostBreakdown c = trajectory_cost(pb, e);

  // independent distance sum from direct propagation
  const auto tm = Sgp4Model<double>::init(pb.target);
  const auto cm = Sgp4Model<double>::init(e);
  double dist = 0.0;
  for (double t : pb.snapshot_times_s()) {
    const Vec3d dr = 1000.0 * (cm.propagate(t / 60.0).position - tm.propagate(t / 60.0).position);
    const double err = norm(dr) - pb.weights.d;
    dist += err * err;
  }
  for (const auto& snap : c.snapshots) CHECK(snap.eclipsed);
  CHECK(c.specular_sum == 0.0);
  CHECK(c.distance_sum == doctest::Approx(dist).epsilon(1e-9));
  CHECK(c.total == doctest::Approx(pb.weights.lambda_d_effective() * dist).epsilon(1e-12));
}

TEST_CASE("total is exactly the weighted sum of the snapshot parts") {
  const Scenario s = build_scenario(testdata::shipped_config());
  TrajectoryProblem pb = s.problem;
  pb.window.snapshots = 8;
  pb.weights.lambda_S = 1.7;
  pb.weights.lambda_d = 3e-6;
  const MeanElements<double> e = elements_from_tle(s.chaser);
  const std::vector<ElementId> vars{ElementId::inclination, ElementId::mean_anomaly, ElementId::eccentricity};
  for (const CostBreakdown& c : {trajectory_cost(pb, e), evaluate_with_gradient(pb, e, vars)}) {
    double total = 0.0, ss = 0.0, ds = 0.0;
    for (const auto& snap : c.snapshots) {
      CHECK(snap.weighted == 1.7 * snap.specular + 3e-6 * snap.distance);
      CHECK(snap.specular >= 0.0);
      CHECK(snap.specular <= 1.0);
      total += snap.weighted;
      ss += snap.specular;
      ds += snap.distance;
    }
    CHECK(c.total == total);
    CHECK(c.specular_sum == ss);
    CHECK(c.distance_sum == ds);
  }
}

TEST_CASE("trajectory cost is independent of the thread count") {
  const Scenario s = build_scenario(testdata::shipped_config());
  TrajectoryProblem pb = s.problem;
  const MeanElements<double> e = elements_from_tle(s.chaser);
  const std::vector<ElementId> vars{ElementId::inclination, ElementId::mean_anomaly, ElementId::eccentricity};
  pb.threads = 1;
  const CostBreakdown a = evaluate_with_gradient(pb, e, vars);
  pb.threads = 7;
  const CostBreakdown b = evaluate_with_gradient(pb, e, vars);
  CHECK(a.total == b.total);
  REQUIRE(a.grad_total.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) CHECK(a.grad_total[k] == b.grad_total[k]);
  // dual primal agrees with plain evaluation bit for bit
  CHECK(trajectory_cost(pb, e).total == a.total);
}

TEST_CASE("total-cost gradient matches central differences") {
  const Scenario s = build_scenario(testdata::shipped_config());
  TrajectoryProblem pb = s.problem;
  pb.window.snapshots = 8;
  const MeanElements<double> e = elements_from_tle(s.chaser);
  const std::vector<ElementId> vars{ElementId::inclination, ElementId::mean_anomaly, ElementId::eccentricity};
  const std::vector<double> steps{1e-7, 1e-7, 1e-8};

  std::vector<Visibility> vis;
  EvaluationOptions o;
  o.visibility_out = &vis;
  const CostBreakdown c = evaluate_with_gradient(pb, e, vars, o);
  REQUIRE(c.specular_sum > 0.0);
  for (std::size_t k = 0; k < vars.size(); ++k) {
    const double fd = fd_frozen(pb, e, vars[k], steps[k], vis);
    INFO(element_name(vars[k]), ": dual ", c.grad_total[k], " fd ", fd);
    CHECK(rel(c.grad_total[k], fd) < 1e-2);
  }
}

TEST_CASE("distance-only gradient matches plain central differences") {
  const Scenario s = build_scenario(testdata::shipped_config());
  TrajectoryProblem pb = s.problem;
  pb.window.snapshots = 6;
  pb.weights.lambda_S = 0.0;
  pb.camera.width = pb.camera.height = 8;
  MeanElements<double> e = elements_from_tle(s.chaser);
  e.mean_anomaly += 2e-5;  // off the d-sphere so the gradient is not tiny
  const std::vector<ElementId> vars{ElementId::inclination, ElementId::mean_anomaly, ElementId::eccentricity};
  const std::vector<double> steps{1e-7, 1e-7, 1e-8};
  const CostBreakdown c = evaluate_with_gradient(pb, e, vars);
  for (std::size_t k = 0; k < vars.size(); ++k) {
    const double fd = fd_plain(pb, e, vars[k], steps[k]);
    INFO(element_name(vars[k]), ": dual ", c.grad_total[k], " fd ", fd);
    CHECK(rel(c.grad_total[k], fd) < 1e-4);
  }
}

TEST_CASE("frozen visibility must match the snapshot count") {
  const Scenario s = build_scenario(testdata::shipped_config());
  const std::vector<Visibility> vis(3);
  EvaluationOptions o;
  o.frozen = &vis;
  CHECK_THROWS_AS(trajectory_cost(s.problem, elements_from_tle(s.chaser), o), ConfigError);
  TrajectoryProblem pb = s.problem;
  pb.mesh = nullptr;
  CHECK_THROWS_AS(trajectory_cost(pb, elements_from_tle(s.chaser)), ConfigError);
}

TEST_CASE("render_snapshot agrees with the cost evaluation") {
  const Scenario s = build_scenario(testdata::shipped_config());
  const MeanElements<double> e = elements_from_tle(s.chaser);
  const CostBreakdown c = trajectory_cost(s.problem, e);
  const auto times = s.problem.snapshot_times_s();
  for (std::size_t i = 0; i < times.size(); i += 4) {
    const SnapshotRender r = render_snapshot(s.problem, e, times[i], 3);
    CHECK(r.eclipsed == c.snapshots[i].eclipsed);
    CHECK(norm(r.relative_m - c.snapshots[i].relative_m) == 0.0);
    if (r.eclipsed) {
      CHECK(saturation_fraction(r.buffers, 1.0) == 0.0);
    } else {
      CHECK(r.buffers.mask_count() == c.snapshots[i].masked_pixels);
      CHECK(specular_cost(r.buffers, r.light) == c.snapshots[i].specular);
    }
  }
}
