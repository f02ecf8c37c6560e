#pragma once

#include <cmath>
#include <cstddef>

#include "pocodom/geometry.hpp"
#include "pocodom/image.hpp"

namespace pocodom {

/// Log-odds to probability mapping.
enum class ProbabilityModel {
  /// p = 1 - exp(-l), clamped below at 0.
  OneMinusExp,
  /// p = 1 / (1 + exp(-l)).
  Logistic,
};

struct GridParams {
  int n = 512;
  double resolution = 0.3;
  /// Log-odds added per point that lands in a cell.
  double l_occupied = std::log(2.0);
  /// Prior occupancy probability; contributes log((1-p)/p) to every cell.
  double prior_probability = 0.5;
  double l_past = 0.0;
  ProbabilityModel model = ProbabilityModel::OneMinusExp;
  /// Rasterize ground points too (off: ground carries no horizontal structure).
  bool include_ground = false;

  void validate() const;
  double base_log_odds() const { return l_past + std::log((1.0 - prior_probability) / prior_probability); }
};

struct OccupancyGrid {
  Image log_odds;
  CountImage hits;
  GridParams params;
  std::size_t sweep_index = 0;

  int n() const { return params.n; }
};

/// Projects onto the (left, forward) plane: row = c + round(left / res),
/// col = c + round(forward / res), c = n / 2. Points outside are dropped.
/// Throws EmptyGrid when no point lands inside.
OccupancyGrid rasterize(const PointCloud& cloud, const GridParams& params, const FrameConvention& conv);

double log_odds_to_probability(double l, ProbabilityModel model);
Image to_probability(const OccupancyGrid& grid);

}  // namespace pocodom
