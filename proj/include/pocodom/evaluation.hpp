#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pocodom/geometry.hpp"
#include "pocodom/pipeline.hpp"

namespace pocodom {

struct SegmentError {
  std::size_t start_index = 0;
  double length = 0.0;
  double translation_percent = 0.0;
  double rotation_deg_per_100m = 0.0;
};

struct TimingSummary {
  double mean_cycle_ms = 0.0;
  double p95_cycle_ms = 0.0;
};

struct DriftReport {
  double percent_error_per_100m = 0.0;
  double rotation_deg_per_100m = 0.0;
  std::vector<SegmentError> segments;
  double mean_cycle_ms = 0.0;
  double p95_cycle_ms = 0.0;
  std::size_t degraded_sweep_count = 0;
  bool lost_tracking = false;
};

constexpr double kLostTrackingPercent = 50.0;

std::vector<double> default_segment_lengths();

/// "a..b" expands to a, a+100, ..., b; otherwise a comma-separated list.
std::vector<double> parse_segment_lengths(const std::string& text);

/// Relative-pose drift of `traj` against `truth` (indexed by sweep index).
DriftReport evaluate(const Trajectory& traj, const std::vector<RigidTransform>& truth,
                     const std::vector<double>& segment_lengths);

/// Mean and 95th percentile (linear interpolation between order statistics).
TimingSummary timing_summary(const std::vector<double>& cycle_ms);

/// Parses a run report written by format_run_report. Only the columns used
/// for evaluation are filled in.
std::vector<SweepReport> parse_run_report(const std::string& text);

/// Folds timing and degraded-sweep counts from a run report into `report`.
void attach_run_report(DriftReport& report, const std::vector<SweepReport>& rows);

std::string format_drift_csv(const DriftReport& report);
std::string format_drift_summary(const DriftReport& report);

}  // namespace pocodom
