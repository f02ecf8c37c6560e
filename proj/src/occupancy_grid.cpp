#include "pocodom/occupancy_grid.hpp"

#include <algorithm>

#include "pocodom/error.hpp"

namespace pocodom {

void GridParams::validate() const {
  if (n < 64) throw Error(ErrorCode::InvalidArgument, "grid side must be >= 64 pixels");
  if (!(resolution > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid resolution must be > 0");
  if (!(prior_probability > 0.0 && prior_probability < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "prior probability must lie in (0, 1)");
  }
}

OccupancyGrid rasterize(const PointCloud& cloud, const GridParams& params, const FrameConvention& conv) {
  params.validate();
  OccupancyGrid grid;
  grid.params = params;
  grid.sweep_index = cloud.sweep_index;
  grid.hits = CountImage::Zero(params.n, params.n);
  const int c = center_index(params.n);
  std::size_t inside = 0;
  for (const Point3& p : cloud.points) {
    const double row = std::round(conv.left.of(p) / params.resolution) + c;
    const double col = std::round(conv.forward.of(p) / params.resolution) + c;
    if (row < 0 || col < 0 || row >= params.n || col >= params.n) continue;
    ++grid.hits(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
    ++inside;
  }
  if (inside == 0) throw Error(ErrorCode::EmptyGrid, "no point falls inside the grid footprint");
  grid.log_odds = params.base_log_odds() + grid.hits.cast<double>() * params.l_occupied;
  return grid;
}

double log_odds_to_probability(double l, ProbabilityModel model) {
  if (model == ProbabilityModel::Logistic) return 1.0 / (1.0 + std::exp(-l));
  return std::max(0.0, 1.0 - std::exp(-l));
}

Image to_probability(const OccupancyGrid& grid) {
  const ProbabilityModel model = grid.params.model;
  return grid.log_odds.unaryExpr([model](double l) { return log_odds_to_probability(l, model); });
}

}  // namespace pocodom
