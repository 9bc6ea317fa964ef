#pragma once

// Report assets for an optimisation run and the persisted result directory.

#include <array>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "specorb/config.hpp"
#include "specorb/objective.hpp"
#include "specorb/optimizer.hpp"

namespace specorb {

struct TracePoint {
  double t_s = 0.0;
  Vec3d rtn_m;  // chaser relative to target, metres
  bool in_window = false;
};

struct SaturationPoint {
  double t_s = 0.0;
  bool eclipsed = false;
  double saturation = 0.0;
  double specular = 0.0;
};

struct Frame {
  int snapshot = -1;  // -1 when every snapshot is eclipsed
  double t_s = 0.0;
  double specular = 0.0;
  int width = 0, height = 0;
  std::vector<double> intensity;
  std::vector<std::uint8_t> mask;
};

struct ReportBundle {
  std::vector<TracePoint> initial_trace, final_trace;
  std::vector<SaturationPoint> initial_saturation, final_saturation;
  Frame initial_frame, final_frame;
  double full_well = 0.0;
  double distance_m = 0.0;
  double window_s = 0.0;
  bool has_final = true;  // false for a run without iterations

  double saturation_sum(bool optimised) const;
};

struct ReportOptions {
  int resolution = 512;
  int trace_samples = 721;
};

/// Chaser relative position (RTN, m) at `t_s` after the target epoch.
Vec3d relative_position_at(const TrajectoryProblem& problem, const MeanElements<double>& chaser, double t_s);

/// |rel(t0 + P) - rel(t0)| over one target period P, metres.
double relative_trace_closure(const TrajectoryProblem& problem, const MeanElements<double>& chaser,
                              double t0_s = 0.0);

/// Traces cover the inspection window plus one further target period.
ReportBundle evaluate_report(const TrajectoryProblem& problem, const MeanElements<double>& initial,
                             const MeanElements<double>& final_elements, const ReportOptions& options = {});

struct PlotSeries {
  std::string label;
  std::string color;
  std::vector<double> x, y;        // NaN in y breaks the line
  std::vector<std::uint8_t> solid;  // per segment; empty means all solid
  bool markers = false;
  bool start_marker = false;  // open ring at the first point
};

struct PlotPanel {
  std::string title, xlabel, ylabel;
  std::vector<PlotSeries> series;
  bool equal_aspect = false;
  std::vector<std::array<double, 2>> points;  // marked with dots
};

/// Stacked panels, one SVG document.
void write_svg_plot(std::ostream& out, const std::vector<PlotPanel>& panels, int width = 720, int panel_height = 300);

void write_cost_history_svg(std::ostream& out, const std::vector<IterationRecord>& history, const CostWeights& w);
void write_rtn_svg(std::ostream& out, const ReportBundle& r);
void write_saturation_svg(std::ostream& out, const ReportBundle& r);

/// Writes history.csv, initial.tle, optimized.tle, config.json (with copied
/// inputs), result.json and the report assets under `dir`.
void write_result_dir(const std::string& dir, const Scenario& scenario, const OptimizationResult& result);

struct PersistedResult {
  RunConfig config;
  MeanElements<double> initial_elements, final_elements;
  std::vector<IterationRecord> history;  // cost totals and elements only
};

PersistedResult load_result_dir(const std::string& dir);

/// Regenerates the report assets of a result directory into `out_dir`.
ReportBundle write_report(const std::string& result_dir, const std::string& out_dir);

}  // namespace specorb
