#pragma once

// Chaser initialisation, Adam and the outer optimisation loop.

#include <atomic>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "specorb/objective.hpp"
#include "specorb/propagator.hpp"
#include "specorb/tle.hpp"

namespace specorb {

struct AdamParams {
  double lr = 4e-6;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<double> m, v;
  long step_count = 0;
  AdamParams hyper;

  AdamState() = default;
  AdamState(std::size_t k, AdamParams p) : m(k, 0.0), v(k, 0.0), hyper(p) {}
};

/// Bias-corrected Adam update in place. A non-finite gradient raises
/// NumericError and leaves params and state untouched.
void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state);

/// Target elements with the mean anomaly moved back by d / a (d in metres),
/// so the chaser trails the target along-track by about d.
Tle init_chaser(const Tle& target, double d_m);

struct OptimizerSettings {
  int iterations = 200;
  std::vector<ElementId> variables{ElementId::inclination, ElementId::mean_anomaly, ElementId::eccentricity};
  AdamParams adam;
  int window = 20;
  double window_tolerance = 1e-4;
  /// Optional per-variable step scale (optimisation runs on p / scale).
  std::map<ElementId, double> scale;
  const std::atomic<bool>* cancel = nullptr;
};

struct IterationRecord {
  int iter = 0;
  MeanElements<double> elements;
  CostBreakdown cost;
  double grad_norm = 0.0;
};

struct OptimizationResult {
  std::vector<IterationRecord> history;  // one entry per evaluated iteration
  Tle initial_chaser, final_chaser;
  MeanElements<double> initial_elements, final_elements;
  CostBreakdown initial_cost, final_cost;
  bool converged = false;
  bool aborted = false;
  std::string stop_reason;
};

using IterationCallback = std::function<void(const IterationRecord&)>;

/// Keeps angles in [0, 2pi), inclination in [0, pi], eccentricity in
/// [0, 0.9999] and mean motion positive.
void normalize_elements(MeanElements<double>& e);

/// Cost with the gradient over `variables` (at most six).
CostBreakdown evaluate_with_gradient(const TrajectoryProblem& problem, const MeanElements<double>& chaser,
                                     std::span<const ElementId> variables, const EvaluationOptions& opt = {});

/// Runs Adam from `chaser`. Failures inside the loop end the run with
/// `aborted` set and the last good state kept; they are not rethrown.
OptimizationResult optimize(const TrajectoryProblem& problem, const Tle& chaser, const OptimizerSettings& settings,
                            const IterationCallback& on_iteration = {});

struct AuditEntry {
  ElementId variable{};
  double step = 0.0;
  double dual = 0.0;
  double fd_frozen = 0.0;   // central difference with visibility held fixed
  double fd_plain = 0.0;    // central difference with visibility recomputed
  double rel_error = 0.0;   // dual vs fd_frozen
  bool visibility_changed = false;
};

struct GradientAudit {
  double total = 0.0;
  std::vector<AuditEntry> entries;
  double max_rel_error() const;
};

/// Default central-difference steps: 1e-7 rad for angles, 1e-8 for
/// eccentricity, 1e-10 rad/min for mean motion.
double default_fd_step(ElementId id);

GradientAudit audit_cost_gradient(const TrajectoryProblem& problem, const MeanElements<double>& chaser,
                                  std::span<const ElementId> variables, const std::vector<double>& steps = {});

/// |a - b| / max(|a|, |b|); 0 when both are zero.
double relative_error(double a, double b);

/// history.csv: iter,total,L_S_sum,L_d_sum,i_c,M_c,e_c,grad_norm
void write_history_csv(std::ostream& out, const std::vector<IterationRecord>& history);

}  // namespace specorb
