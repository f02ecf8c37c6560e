#include "pocodom/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "pocodom/error.hpp"

namespace pocodom {

std::vector<double> default_segment_lengths() { return {100, 200, 300, 400, 500, 600, 700, 800}; }

std::vector<double> parse_segment_lengths(const std::string& text) {
  std::vector<double> out;
  try {
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
      const double lo = std::stod(text.substr(0, dots));
      const double hi = std::stod(text.substr(dots + 2));
      if (!(lo > 0.0) || hi < lo) throw Error(ErrorCode::InvalidArgument, "bad segment range " + text);
      for (double l = lo; l <= hi + 1e-9; l += 100.0) out.push_back(l);
    } else {
      std::istringstream parts(text);
      for (std::string item; std::getline(parts, item, ',');) out.push_back(std::stod(item));
    }
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::InvalidArgument, "cannot parse segment lengths '" + text + "'");
  }
  if (out.empty() || std::any_of(out.begin(), out.end(), [](double l) { return !(l > 0.0); })) {
    throw Error(ErrorCode::InvalidArgument, "segment lengths must be positive: '" + text + "'");
  }
  return out;
}

DriftReport evaluate(const Trajectory& traj, const std::vector<RigidTransform>& truth,
                     const std::vector<double>& segment_lengths) {
  if (traj.size() < 2) throw Error(ErrorCode::InvalidArgument, "trajectory needs at least two poses");
  if (segment_lengths.empty()) throw Error(ErrorCode::InvalidArgument, "no segment lengths given");
  const std::size_t n = traj.size();
  std::vector<RigidTransform> gt(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = traj.poses[i].sweep_index;
    if (k >= truth.size()) {
      throw Error(ErrorCode::InvalidArgument, "ground truth has no pose for sweep " + std::to_string(k));
    }
    gt[i] = truth[k];
  }
  std::vector<double> arc(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    arc[i] = arc[i - 1] + (gt[i].translation() - gt[i - 1].translation()).norm();
  }
  const double shortest = *std::min_element(segment_lengths.begin(), segment_lengths.end());
  if (arc.back() < shortest) {
    throw Error(ErrorCode::TooShort, "trajectory covers " + std::to_string(arc.back()) + " m, shorter than " +
                                         std::to_string(shortest) + " m");
  }

  DriftReport report;
  for (std::size_t i = 0; i < n; ++i) {
    for (double len : segment_lengths) {
      const auto it = std::lower_bound(arc.begin() + static_cast<std::ptrdiff_t>(i), arc.end(), arc[i] + len);
      if (it == arc.end()) continue;
      const auto j = static_cast<std::size_t>(it - arc.begin());
      const RigidTransform est = traj.poses[i].pose.inverse() * traj.poses[j].pose;
      const RigidTransform ref = gt[i].inverse() * gt[j];
      SegmentError seg;
      seg.start_index = traj.poses[i].sweep_index;
      seg.length = len;
      seg.translation_percent = (est.translation() - ref.translation()).norm() / len * 100.0;
      seg.rotation_deg_per_100m = (ref.inverse() * est).rotation_angle() * 180.0 / std::numbers::pi / len * 100.0;
      report.segments.push_back(seg);
    }
  }
  if (report.segments.empty()) {
    throw Error(ErrorCode::TooShort, "no segment of the requested lengths fits the trajectory");
  }
  double t_sum = 0.0, r_sum = 0.0;
  for (const SegmentError& s : report.segments) {
    t_sum += s.translation_percent;
    r_sum += s.rotation_deg_per_100m;
    if (s.translation_percent > kLostTrackingPercent) report.lost_tracking = true;
  }
  report.percent_error_per_100m = t_sum / static_cast<double>(report.segments.size());
  report.rotation_deg_per_100m = r_sum / static_cast<double>(report.segments.size());
  return report;
}

TimingSummary timing_summary(const std::vector<double>& cycle_ms) {
  if (cycle_ms.empty()) throw Error(ErrorCode::InvalidArgument, "timing summary needs at least one row");
  std::vector<double> sorted = cycle_ms;
  std::sort(sorted.begin(), sorted.end());
  TimingSummary out;
  double sum = 0.0;
  for (double v : cycle_ms) sum += v;
  out.mean_cycle_ms = sum / static_cast<double>(cycle_ms.size());
  const double rank = 0.95 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  out.p95_cycle_ms = sorted[lo] + (rank - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  return out;
}

std::vector<SweepReport> parse_run_report(const std::string& text) {
  std::vector<SweepReport> rows;
  std::istringstream lines(text);
  std::vector<std::string> header;
  const auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::istringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    return cells;
  };
  const auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCode::MalformedFile, "run report lacks column " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  std::size_t c_sweep = 0, c_ms = 0, c_degraded = 0, c_skipped = 0;
  for (std::string line; std::getline(lines, line);) {
    if (line.empty() || line[0] == '#') continue;
    if (header.empty()) {
      header = split(line);
      c_sweep = column("sweep");
      c_ms = column("cycle_ms");
      c_degraded = column("degraded");
      c_skipped = column("skipped");
      continue;
    }
    const std::vector<std::string> cells = split(line);
    if (cells.size() < std::max({c_sweep, c_ms, c_degraded, c_skipped}) + 1) {
      throw Error(ErrorCode::MalformedFile, "short run report row: " + line);
    }
    SweepReport r;
    try {
      r.sweep_index = std::stoul(cells[c_sweep]);
      r.cycle_ms = std::stod(cells[c_ms]);
      r.degraded = std::stoi(cells[c_degraded]) != 0;
      r.skipped = std::stoi(cells[c_skipped]) != 0;
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::MalformedFile, "unparsable run report row: " + line);
    }
    rows.push_back(r);
  }
  if (header.empty()) throw Error(ErrorCode::MalformedFile, "run report has no header");
  return rows;
}

void attach_run_report(DriftReport& report, const std::vector<SweepReport>& rows) {
  std::vector<double> ms;
  report.degraded_sweep_count = 0;
  for (const SweepReport& r : rows) {
    if (r.degraded) ++report.degraded_sweep_count;
    if (!r.skipped) ms.push_back(r.cycle_ms);
  }
  if (ms.empty()) return;
  const TimingSummary t = timing_summary(ms);
  report.mean_cycle_ms = t.mean_cycle_ms;
  report.p95_cycle_ms = t.p95_cycle_ms;
}

std::string format_drift_csv(const DriftReport& report) {
  std::string out = "start_index,length_m,translation_percent,rotation_deg_per_100m\n";
  char buf[128];
  for (const SegmentError& s : report.segments) {
    std::snprintf(buf, sizeof(buf), "%zu,%.6g,%.9g,%.9g\n", s.start_index, s.length, s.translation_percent,
                  s.rotation_deg_per_100m);
    out += buf;
  }
  return out;
}

std::string format_drift_summary(const DriftReport& report) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "segments:               %zu\n"
                "translation error:      %.4f %%/100m\n"
                "rotation error:         %.4f deg/100m\n"
                "mean cycle:             %.2f ms\n"
                "p95 cycle:              %.2f ms\n"
                "degraded sweeps:        %zu\n"
                "lost tracking:          %s\n",
                report.segments.size(), report.percent_error_per_100m, report.rotation_deg_per_100m,
                report.mean_cycle_ms, report.p95_cycle_ms, report.degraded_sweep_count,
                report.lost_tracking ? "yes" : "no");
  return buf;
}

}  // namespace pocodom
