#include "specorb/optimizer.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <sstream>

namespace specorb {

namespace {


template <std::size_t K>
CostBreakdown evaluate_k(const TrajectoryProblem& pb, const MeanElements<double>& chaser,
                         std::span<const ElementId> vars, const EvaluationOptions& opt) {
  MeanElements<Dual<K>> e = lift_elements<Dual<K>>(chaser);
  for (std::size_t k = 0; k < vars.size(); ++k) e[vars[k]] = seed<K>(chaser[vars[k]], k);
  CostBreakdown c = trajectory_cost(pb, e, opt);
  c.grad_total.resize(vars.size());
  return c;
}

double norm2(std::span<const double> g) {
  double s = 0.0;
  for (double x : g) s += x * x;
  return std::sqrt(s);
}

std::string describe_state(int iter, const MeanElements<double>& e, std::span<const double> grad) {
  std::ostringstream os;
  os.precision(17);
  os << "iteration " << iter << ": i=" << e.inclination << " M=" << e.mean_anomaly << " e=" << e.eccentricity
     << " grad=[";
  for (std::size_t k = 0; k < grad.size(); ++k) os << (k ? "," : "") << grad[k];
  os << "]";
  return os.str();
}

}  // namespace

void adam_step(std::span<double> params, std::span<const double> grad, AdamState& s) {
  const std::size_t k = params.size();
  if (grad.size() != k) throw ConfigError("gradient size does not match the parameter count");
  if (s.m.size() != k) s.m.assign(k, 0.0);
  if (s.v.size() != k) s.v.assign(k, 0.0);
  for (double g : grad)
    if (!std::isfinite(g)) throw NumericError("non-finite gradient in Adam step");
  const AdamParams& h = s.hyper;
  const long t = s.step_count + 1;
  const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < k; ++i) {
    s.m[i] = h.beta1 * s.m[i] + (1.0 - h.beta1) * grad[i];
    s.v[i] = h.beta2 * s.v[i] + (1.0 - h.beta2) * grad[i] * grad[i];
    const double mhat = s.m[i] / c1;
    const double vhat = s.v[i] / c2;
    params[i] -= h.lr * mhat / (std::sqrt(vhat) + h.epsilon);
  }
  s.step_count = t;
}

Tle init_chaser(const Tle& target, double d_m) {
  if (!(d_m >= 0.0)) throw ConfigError("imaging distance must be non-negative");
  Tle c = target;
  const double a = semi_major_axis(target);
  const double dm_rad = (d_m / 1000.0) / a;
  c.mean_anomaly = wrap_degrees(target.mean_anomaly - dm_rad * 180.0 / std::numbers::pi);
  return c;
}

void normalize_elements(MeanElements<double>& e) {
  auto wrap = [](double x) {
    double r = std::fmod(x, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    return r >= kTwoPi ? 0.0 : r;
  };
  e.raan = wrap(e.raan);
  e.arg_perigee = wrap(e.arg_perigee);
  e.mean_anomaly = wrap(e.mean_anomaly);
  e.inclination = std::clamp(e.inclination, 0.0, std::numbers::pi);
  e.eccentricity = std::clamp(e.eccentricity, 0.0, 0.9999);
  e.mean_motion = std::max(e.mean_motion, 1e-8);
}

CostBreakdown evaluate_with_gradient(const TrajectoryProblem& pb, const MeanElements<double>& chaser,
                                     std::span<const ElementId> vars, const EvaluationOptions& opt) {
  if (vars.empty()) return trajectory_cost(pb, chaser, opt);
  if (vars.size() <= 3) return evaluate_k<3>(pb, chaser, vars, opt);
  if (vars.size() <= 6) return evaluate_k<6>(pb, chaser, vars, opt);
  throw ConfigError("at most six decision variables are supported");
}

OptimizationResult optimize(const TrajectoryProblem& pb, const Tle& chaser, const OptimizerSettings& st,
                            const IterationCallback& on_iteration) {
  if (st.iterations < 0) throw ConfigError("iteration count must be non-negative");
  if (st.variables.empty() || st.variables.size() > 6)
    throw ConfigError("between one and six decision variables are required");
  for (std::size_t a = 0; a < st.variables.size(); ++a)
    for (std::size_t b = a + 1; b < st.variables.size(); ++b)
      if (st.variables[a] == st.variables[b]) throw ConfigError("duplicate decision variable");
  if (st.window < 1) throw ConfigError("convergence window must be at least 1");

  const std::size_t k = st.variables.size();
  std::vector<double> scale(k, 1.0);
  for (std::size_t i = 0; i < k; ++i) {
    const auto it = st.scale.find(st.variables[i]);
    if (it != st.scale.end()) {
      if (!(it->second > 0.0)) throw ConfigError("variable scale must be positive");
      scale[i] = it->second;
    }
  }

  OptimizationResult r;
  r.initial_chaser = chaser;
  r.initial_elements = elements_from_tle(chaser);
  MeanElements<double> current = r.initial_elements;
  AdamState adam(k, st.adam);
  std::vector<double> x(k), gx(k);

  for (int it = 0; it < st.iterations; ++it) {
    if (st.cancel && st.cancel->load()) {
      r.stop_reason = "cancelled";
      break;
    }
    IterationRecord rec;
    rec.iter = it;
    rec.elements = current;
    try {
      rec.cost = evaluate_with_gradient(pb, current, st.variables);
    } catch (const Error& e) {
      r.aborted = true;
      r.stop_reason = std::string("evaluation failed at iteration ") + std::to_string(it) + ": " + e.what();
      break;
    }
    rec.grad_norm = norm2(rec.cost.grad_total);
    r.history.push_back(rec);
    if (on_iteration) on_iteration(r.history.back());

    if (!std::isfinite(rec.cost.total)) {
      r.aborted = true;
      r.stop_reason = "non-finite cost at " + describe_state(it, current, rec.cost.grad_total);
      break;
    }
    if (it >= st.window) {
      const double prev = r.history[static_cast<std::size_t>(it - st.window)].cost.total;
      const double rel = std::fabs(rec.cost.total - prev) / std::max(std::fabs(prev), 1e-300);
      if (rel < st.window_tolerance) {
        r.converged = true;
        r.stop_reason = "converged";
        break;
      }
    }
    if (it + 1 == st.iterations) break;

    for (std::size_t i = 0; i < k; ++i) {
      x[i] = current[st.variables[i]] / scale[i];
      gx[i] = rec.cost.grad_total[i] * scale[i];
    }
    try {
      adam_step(x, gx, adam);
    } catch (const NumericError& e) {
      r.aborted = true;
      r.stop_reason = std::string(e.what()) + " at " + describe_state(it, current, rec.cost.grad_total);
      break;
    }
    MeanElements<double> next = current;
    for (std::size_t i = 0; i < k; ++i) next[st.variables[i]] = x[i] * scale[i];
    normalize_elements(next);
    current = next;
  }
  if (r.stop_reason.empty()) r.stop_reason = "iteration limit";

  // The last recorded iterate is the final state; with no history the
  // initial orbit is both.
  r.final_elements = r.history.empty() ? r.initial_elements : r.history.back().elements;
  r.final_chaser = tle_from_elements(chaser, r.final_elements);
  if (r.history.empty()) {
    if (!r.aborted) {
      r.initial_cost = trajectory_cost(pb, r.initial_elements);
      r.final_cost = r.initial_cost;
    }
  } else {
    r.initial_cost = r.history.front().cost;
    r.final_cost = r.history.back().cost;
  }
  return r;
}

double relative_error(double a, double b) {
  const double s = std::max(std::fabs(a), std::fabs(b));
  return s == 0.0 ? 0.0 : std::fabs(a - b) / s;
}

double GradientAudit::max_rel_error() const {
  double m = 0.0;
  for (const auto& e : entries) m = std::max(m, e.rel_error);
  return m;
}

double default_fd_step(ElementId id) {
  switch (id) {
    case ElementId::eccentricity: return 1e-8;
    case ElementId::mean_motion: return 1e-10;
    default: return 1e-7;
  }
}

GradientAudit audit_cost_gradient(const TrajectoryProblem& pb, const MeanElements<double>& chaser,
                                  std::span<const ElementId> vars, const std::vector<double>& steps) {
  if (!steps.empty() && steps.size() != vars.size()) throw ConfigError("one finite-difference step per variable");
  std::vector<Visibility> vis;
  EvaluationOptions capture;
  capture.visibility_out = &vis;
  const CostBreakdown base = evaluate_with_gradient(pb, chaser, vars, capture);
  GradientAudit a;
  a.total = base.total;
  for (std::size_t k = 0; k < vars.size(); ++k) {
    AuditEntry e;
    e.variable = vars[k];
    e.step = steps.empty() ? default_fd_step(vars[k]) : steps[k];
    e.dual = base.grad_total[k];
    MeanElements<double> p = chaser, m = chaser;
    p[vars[k]] += e.step;
    m[vars[k]] -= e.step;
    EvaluationOptions frozen;
    frozen.frozen = &vis;
    e.fd_frozen = (trajectory_cost(pb, p, frozen).total - trajectory_cost(pb, m, frozen).total) / (2.0 * e.step);
    std::vector<Visibility> vp, vm;
    EvaluationOptions op, om;
    op.visibility_out = &vp;
    om.visibility_out = &vm;
    const double jp = trajectory_cost(pb, p, op).total;
    const double jm = trajectory_cost(pb, m, om).total;
    e.fd_plain = (jp - jm) / (2.0 * e.step);
    for (std::size_t s = 0; s < vis.size(); ++s)
      if (vp[s].triangle != vis[s].triangle || vm[s].triangle != vis[s].triangle || vp[s].lit != vis[s].lit ||
          vm[s].lit != vis[s].lit)
        e.visibility_changed = true;
    e.rel_error = relative_error(e.dual, e.fd_frozen);
    a.entries.push_back(e);
  }
  return a;
}

void write_history_csv(std::ostream& out, const std::vector<IterationRecord>& history) {
  out << "iter,total,L_S_sum,L_d_sum,i_c,M_c,e_c,grad_norm\n";
  char buf[256];
  for (const auto& h : history) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", h.iter, h.cost.total,
                  h.cost.specular_sum, h.cost.distance_sum, h.elements.inclination, h.elements.mean_anomaly,
                  h.elements.eccentricity, h.grad_norm);
    out << buf;
  }
}

}  // namespace specorb
