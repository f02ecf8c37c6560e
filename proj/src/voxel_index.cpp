#include "pocodom/voxel_index.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "pocodom/error.hpp"

namespace pocodom {

VoxelIndex::VoxelIndex(const std::vector<Point3>& points, double cell) : points_(&points), cell_(cell) {
  if (!(cell > 0.0)) throw Error(ErrorCode::InvalidArgument, "voxel cell size must be > 0");
  std::vector<VoxelKey> keys(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) keys[i] = voxel_of(points[i], cell);
  order_.resize(points.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  auto less = [&](std::size_t a, std::size_t b) {
    const VoxelKey& ka = keys[a];
    const VoxelKey& kb = keys[b];
    if (ka.x != kb.x) return ka.x < kb.x;
    if (ka.y != kb.y) return ka.y < kb.y;
    if (ka.z != kb.z) return ka.z < kb.z;
    return a < b;
  };
  std::sort(order_.begin(), order_.end(), less);
  sorted_.reserve(points.size());
  for (std::size_t i : order_) sorted_.push_back(points[i]);
  cells_.reserve(points.size() / 4 + 1);
  std::size_t start = 0;
  for (std::size_t k = 1; k <= order_.size(); ++k) {
    if (k == order_.size() || !(keys[order_[k]] == keys[order_[start]])) {
      cells_.emplace(keys[order_[start]], std::make_pair(start, k));
      start = k;
    }
  }
}

std::size_t VoxelIndex::count_within(const Point3& q, double radius, std::size_t limit) const {
  std::size_t count = 0;
  if (limit == 0) return 0;
  for_each_within(q, radius, [&](std::size_t) { return ++count < limit; });
  return count;
}

std::vector<Point3> voxel_downsample(const std::vector<Point3>& points, double voxel) {
  if (voxel <= 0.0) return points;
  std::unordered_set<VoxelKey, VoxelKeyHash> seen;
  seen.reserve(points.size());
  std::vector<Point3> out;
  for (const Point3& p : points) {
    if (seen.insert(voxel_of(p, voxel)).second) out.push_back(p);
  }
  return out;
}

}  // namespace pocodom
