#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "scenario_fixture.hpp"
#include "specorb/optimizer.hpp"

using namespace specorb;

namespace {

constexpr double kPi = std::numbers::pi;

// Largest total over [k, k + w) must not grow with k.
bool sliding_max_non_increasing(const std::vector<double>& j, std::size_t w) {
  if (j.size() < w) return true;
  double prev = INFINITY;
  for (std::size_t k = 0; k + w <= j.size(); ++k) {
    double m = -INFINITY;
    for (std::size_t q = k; q < k + w; ++q) m = std::max(m, j[q]);
    if (m > prev) return false;
    prev = m;
  }
  return true;
}

std::vector<double> totals(const OptimizationResult& r) {
  std::vector<double> v;
  for (const auto& h : r.history) v.push_back(h.cost.total);
  return v;
}

std::vector<double> distances(const OptimizationResult& r) {
  std::vector<double> v;
  for (const auto& h : r.history) v.push_back(h.cost.distance_sum);
  return v;
}

Scenario small_scenario(int resolution = 16) {
  RunConfig c = testdata::shipped_config();
  c.resolution = resolution;
  return build_scenario(c);
}

}  // namespace

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  std::vector<double> p{0.3, -1.2, 5.0};
  const std::vector<double> g{0.0, 0.0, 0.0};
  AdamState s(3, AdamParams{});
  adam_step(p, g, s);
  CHECK(p == std::vector<double>{0.3, -1.2, 5.0});
  CHECK(s.step_count == 1);
}

TEST_CASE("adam: first step is -lr sign(g)") {
  const AdamParams h{};
  std::vector<double> p{1.0, 1.0, 1.0};
  const std::vector<double> g{2.5, -0.003, 1e4};
  AdamState s(3, h);
  adam_step(p, g, s);
  for (std::size_t i = 0; i < 3; ++i) {
    // m_hat = g, v_hat = g^2: update = lr g / (|g| + eps)
    const double expect = -h.lr * g[i] / (std::fabs(g[i]) + h.epsilon);
    CHECK(p[i] - 1.0 == doctest::Approx(expect).epsilon(1e-9));
    CHECK(std::fabs(p[i] - 1.0 + h.lr * (g[i] > 0 ? 1 : -1)) <= h.lr * 1e-5);
  }
}

TEST_CASE("adam: hand-evaluated second step") {
  AdamParams h;
  h.lr = 0.1;
  std::vector<double> p{0.0};
  AdamState s(1, h);
  adam_step(p, std::vector<double>{1.0}, s);
  adam_step(p, std::vector<double>{-2.0}, s);
  const double m = 0.9 * 0.1 + 0.1 * -2.0;
  const double v = 0.999 * 0.001 + 0.001 * 4.0;
  const double step2 = 0.1 * (m / (1 - 0.81)) / (std::sqrt(v / (1 - 0.999 * 0.999)) + 1e-8);
  const double step1 = 0.1 * 1.0 / (1.0 + 1e-8);
  CHECK(p[0] == doctest::Approx(-step1 - step2).epsilon(1e-12));
  CHECK(s.step_count == 2);
  CHECK(s.v[0] >= 0.0);
}

TEST_CASE("adam: deterministic and rejects non-finite gradients") {
  std::vector<double> a{0.5, 0.5}, b{0.5, 0.5};
  AdamState sa(2, AdamParams{}), sb(2, AdamParams{});
  const std::vector<double> g{0.7, -3.0};
  adam_step(a, g, sa);
  adam_step(b, g, sb);
  CHECK(a == b);
  CHECK(sa.m == sb.m);
  CHECK(sa.v == sb.v);

  const std::vector<double> bad{1.0, NAN};
  const auto before = a;
  CHECK_THROWS_AS(adam_step(a, bad, sa), NumericError);
  CHECK(a == before);
  CHECK(sa.step_count == 1);
  CHECK_THROWS_AS(adam_step(a, std::vector<double>{1.0}, sa), ConfigError);
}

TEST_CASE("init_chaser examples") {
  Tle t = default_target_tle();
  // mean motion for a = 7000 km
  const double mu = 398600.4418, a = 7000.0;
  t.mean_motion = std::sqrt(mu / (a * a * a)) * 86400.0 / (2.0 * kPi);
  CHECK(semi_major_axis(t) == doctest::Approx(7000.0).epsilon(1e-12));
  const Tle c = init_chaser(t, 700.0);
  double dm = (t.mean_anomaly - c.mean_anomaly) * kPi / 180.0;
  CHECK(dm == doctest::Approx(1e-4).epsilon(1e-9));
  CHECK(c.inclination == t.inclination);
  CHECK(c.eccentricity == t.eccentricity);
  CHECK(c.raan == t.raan);
  CHECK(c.epoch == t.epoch);

  const Tle same = init_chaser(t, 0.0);
  CHECK(same.mean_anomaly == t.mean_anomaly);

  Tle wrap = t;
  wrap.mean_anomaly = 0.001;
  const Tle w = init_chaser(wrap, 700.0);
  CHECK(w.mean_anomaly >= 0.0);
  CHECK(w.mean_anomaly < 360.0);
  CHECK(w.mean_anomaly == doctest::Approx(360.0 + 0.001 - 1e-4 * 180.0 / kPi).epsilon(1e-12));

  CHECK_THROWS_AS(init_chaser(t, -1.0), ConfigError);
}

TEST_CASE("initial separation is within 5% of d") {
  const Tle t = default_target_tle();
  const auto tm = Sgp4Model<double>::init(elements_from_tle(t));
  for (double d : {100.0, 500.0, 2000.0}) {
    const auto cm = Sgp4Model<double>::init(elements_from_tle(init_chaser(t, d)));
    const double sep = 1000.0 * norm(cm.propagate(0.0).position - tm.propagate(0.0).position);
    CHECK(std::fabs(sep - d) < 0.05 * d);
  }
}

TEST_CASE("normalize_elements wraps angles and clamps the rest") {
  MeanElements<double> e;
  e.raan = -0.5;
  e.arg_perigee = 7.0;
  e.mean_anomaly = 2.0 * kPi;
  e.inclination = 3.5;
  e.eccentricity = -0.01;
  e.mean_motion = -1.0;
  normalize_elements(e);
  CHECK(e.raan == doctest::Approx(2.0 * kPi - 0.5));
  CHECK(e.arg_perigee == doctest::Approx(7.0 - 2.0 * kPi));
  CHECK(e.mean_anomaly == 0.0);
  CHECK(e.inclination == kPi);
  CHECK(e.eccentricity == 0.0);
  CHECK(e.mean_motion > 0.0);
  e.eccentricity = 1.5;
  e.inclination = -0.1;
  normalize_elements(e);
  CHECK(e.eccentricity == 0.9999);
  CHECK(e.inclination == 0.0);
}

TEST_CASE("optimize validates its settings") {
  const Scenario s = small_scenario(8);
  OptimizerSettings o = s.optimizer;
  o.iterations = -1;
  CHECK_THROWS_AS(optimize(s.problem, s.chaser, o), ConfigError);
  o = s.optimizer;
  o.variables = {ElementId::inclination, ElementId::inclination};
  CHECK_THROWS_AS(optimize(s.problem, s.chaser, o), ConfigError);
  o = s.optimizer;
  o.variables.clear();
  CHECK_THROWS_AS(optimize(s.problem, s.chaser, o), ConfigError);
  o = s.optimizer;
  o.scale[ElementId::inclination] = 0.0;
  CHECK_THROWS_AS(optimize(s.problem, s.chaser, o), ConfigError);
}

TEST_CASE("zero iterations report the initial orbit only") {
  const Scenario s = small_scenario(8);
  OptimizerSettings o = s.optimizer;
  o.iterations = 0;
  const OptimizationResult r = optimize(s.problem, s.chaser, o);
  CHECK(r.history.empty());
  CHECK(r.final_elements.mean_anomaly == r.initial_elements.mean_anomaly);
  CHECK(r.final_cost.total == r.initial_cost.total);
  CHECK(r.initial_cost.total == trajectory_cost(s.problem, r.initial_elements).total);
  CHECK_FALSE(r.aborted);
}

TEST_CASE("history records each iterate and angles stay wrapped") {
  const Scenario s = small_scenario(16);
  OptimizerSettings o = s.optimizer;
  o.iterations = 12;
  int calls = 0;
  const OptimizationResult r = optimize(s.problem, s.chaser, o, [&](const IterationRecord&) { ++calls; });
  REQUIRE(r.history.size() == 12);
  CHECK(calls == 12);
  for (std::size_t k = 0; k < r.history.size(); ++k) {
    const auto& h = r.history[k];
    CHECK(h.iter == static_cast<int>(k));
    CHECK(h.cost.grad_total.size() == 3);
    CHECK(h.elements.mean_anomaly >= 0.0);
    CHECK(h.elements.mean_anomaly < 2.0 * kPi);
    CHECK(h.elements.eccentricity >= 0.0);
    CHECK(h.elements.eccentricity <= 0.9999);
    // untouched elements keep their values
    CHECK(h.elements.raan == r.initial_elements.raan);
    CHECK(h.elements.mean_motion == r.initial_elements.mean_motion);
  }
  CHECK(r.final_elements.inclination == r.history.back().elements.inclination);
  CHECK(r.final_cost.total == r.history.back().cost.total);
  CHECK(r.stop_reason == "iteration limit");
  // the serialised chaser matches the final elements to TLE precision
  const MeanElements<double> back = elements_from_tle(r.final_chaser);
  CHECK(back.inclination == doctest::Approx(r.final_elements.inclination).epsilon(1e-6));
  CHECK(r.final_chaser.bstar == s.target.bstar);
}

TEST_CASE("optimisation is deterministic") {
  const Scenario s = small_scenario(24);
  OptimizerSettings o = s.optimizer;
  o.iterations = 15;
  const OptimizationResult a = optimize(s.problem, s.chaser, o);
  const OptimizationResult b = optimize(s.problem, s.chaser, o);
  std::ostringstream ha, hb;
  write_history_csv(ha, a.history);
  write_history_csv(hb, b.history);
  CHECK(ha.str() == hb.str());
  CHECK(ha.str().rfind("iter,total,L_S_sum,L_d_sum,i_c,M_c,e_c,grad_norm\n", 0) == 0);
}

TEST_CASE("scaling both weights leaves the iterates unchanged") {
  Scenario s = small_scenario(16);
  OptimizerSettings o = s.optimizer;
  o.iterations = 25;
  o.window_tolerance = 0.0;
  const OptimizationResult a = optimize(s.problem, s.chaser, o);
  TrajectoryProblem pb = s.problem;
  pb.weights.lambda_S *= 8.0;
  pb.weights.lambda_d = 8.0 * s.problem.weights.lambda_d_effective();
  const OptimizationResult b = optimize(pb, s.chaser, o);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t k = 0; k < a.history.size(); ++k) {
    const auto& x = a.history[k].elements;
    const auto& y = b.history[k].elements;
    for (ElementId id : o.variables) {
      const double dx = std::fabs(x[id] - y[id]);
      const double step = std::fabs(x[id] - a.initial_elements[id]);
      // iterate displacements agree to 1e-6 relative (Adam's epsilon is the only difference)
      CHECK(dx <= 1e-6 * std::max(step, 1e-9));
    }
  }
  CHECK(b.history[0].cost.total == doctest::Approx(8.0 * a.history[0].cost.total).epsilon(1e-12));
}

TEST_CASE("distance-only optimisation settles at the configured distance") {
  RunConfig c = testdata::shipped_config();
  c.resolution = 8;
  c.lambda_S = 0.0;
  const Scenario s = build_scenario(c);
  const Tle start = init_chaser(s.target, 400.0);  // 100 m short of d
  OptimizerSettings o = s.optimizer;
  o.window_tolerance = 0.0;
  const OptimizationResult r = optimize(s.problem, start, o);
  REQUIRE(r.history.size() == 200);
  const auto d = distances(r);
  CHECK(d.back() < 1e-4 * d.front());
  for (const auto& snap : r.final_cost.snapshots) CHECK(std::fabs(snap.separation_m - 500.0) < 0.01 * 500.0);
  // oscillation allowed pointwise, trend strictly down
  CHECK(sliding_max_non_increasing(d, 50));
}

TEST_CASE("shipped scenario: cost falls and the 50-iteration envelope never rises") {
  const Scenario s = build_scenario(testdata::shipped_config());
  const OptimizationResult r = optimize(s.problem, s.chaser, s.optimizer);
  REQUIRE_FALSE(r.aborted);
  CHECK(r.final_cost.total < r.initial_cost.total);
  CHECK(r.final_cost.specular_sum < r.initial_cost.specular_sum);
  CHECK(sliding_max_non_increasing(totals(r), 50));
}

TEST_CASE("cancellation stops between iterations") {
  const Scenario s = small_scenario(8);
  std::atomic<bool> flag{false};
  OptimizerSettings o = s.optimizer;
  o.cancel = &flag;
  const OptimizationResult r = optimize(s.problem, s.chaser, o, [&](const IterationRecord& h) {
    if (h.iter == 4) flag.store(true);
  });
  CHECK(r.history.size() == 5);
  CHECK(r.stop_reason == "cancelled");
}

TEST_CASE("a propagation failure aborts and keeps the last good state") {
  Scenario s = small_scenario(8);
  OptimizerSettings o = s.optimizer;
  o.variables = {ElementId::mean_motion};
  o.adam.lr = 0.3;  // rad/min: the first step leaves the near-Earth regime either way
  o.window_tolerance = 0.0;
  o.iterations = 50;
  const OptimizationResult r = optimize(s.problem, s.chaser, o);
  CHECK(r.aborted);
  CHECK_FALSE(r.stop_reason.empty());
  REQUIRE_FALSE(r.history.empty());
  CHECK(r.final_elements.mean_motion == r.history.back().elements.mean_motion);
  CHECK(r.history.size() == 1);
  CHECK(std::isfinite(r.final_cost.total));
}

TEST_CASE("gradient audit agrees with frozen-visibility differences") {
  RunConfig c = testdata::shipped_config();
  c.snapshots = 8;
  const Scenario s = build_scenario(c);
  const std::vector<ElementId> vars{ElementId::inclination, ElementId::mean_anomaly, ElementId::eccentricity};
  const GradientAudit a = audit_cost_gradient(s.problem, elements_from_tle(s.chaser), vars);
  REQUIRE(a.entries.size() == 3);
  CHECK(a.max_rel_error() < 1e-2);
  CHECK(a.entries[0].step == 1e-7);
  CHECK(a.entries[2].step == 1e-8);
  CHECK(relative_error(2.0, 1.0) == 0.5);
  CHECK(relative_error(0.0, 0.0) == 0.0);
  CHECK_THROWS_AS(audit_cost_gradient(s.problem, elements_from_tle(s.chaser), vars, {1e-7}), ConfigError);
}
