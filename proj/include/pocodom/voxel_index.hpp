#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <type_traits>
#include <unordered_map>
#include <vector>

#include "pocodom/geometry.hpp"

namespace pocodom {

struct VoxelKey {
  std::int64_t x = 0, y = 0, z = 0;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 0xC2B2AE3D27D4EB4FULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667B19E3779F9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

inline VoxelKey voxel_of(const Point3& p, double cell) {
  return {static_cast<std::int64_t>(std::floor(p.x() / cell)), static_cast<std::int64_t>(std::floor(p.y() / cell)),
          static_cast<std::int64_t>(std::floor(p.z() / cell))};
}

/// Uniform voxel hash over a fixed point set. Radius queries with radius <=
/// cell visit the 27 surrounding cells.
class VoxelIndex {
 public:
  VoxelIndex(const std::vector<Point3>& points, double cell);

  double cell() const { return cell_; }

  /// Calls visit(j) for every j with |p_j - q|^2 <= radius^2. Candidates are
  /// visited cell by cell, ascending index within a cell. A visitor returning
  /// bool stops the walk by returning false.
  template <typename Visit>
  void for_each_within(const Point3& q, double radius, Visit&& visit) const {
    const double r2 = radius * radius;
    const VoxelKey c = voxel_of(q, cell_);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          auto it = cells_.find(VoxelKey{c.x + dx, c.y + dy, c.z + dz});
          if (it == cells_.end()) continue;
          for (std::size_t k = it->second.first; k < it->second.second; ++k) {
            const Point3& p = sorted_[k];
            const double ex = p.x() - q.x(), ey = p.y() - q.y(), ez = p.z() - q.z();
            if (ex * ex + ey * ey + ez * ez > r2) continue;
            if constexpr (std::is_same_v<decltype(visit(order_[k])), bool>) {
              if (!visit(order_[k])) return;
            } else {
              visit(order_[k]);
            }
          }
        }
      }
    }
  }

  /// Number of points within radius of q, counting stops at `limit`.
  std::size_t count_within(const Point3& q, double radius, std::size_t limit) const;

 private:
  const std::vector<Point3>* points_;
  double cell_;
  std::vector<std::size_t> order_;
  std::vector<Point3> sorted_;
  std::unordered_map<VoxelKey, std::pair<std::size_t, std::size_t>, VoxelKeyHash> cells_;
};

/// Keeps the first point that falls into each voxel, preserving input order.
/// voxel <= 0 returns the input unchanged.
std::vector<Point3> voxel_downsample(const std::vector<Point3>& points, double voxel);

}  // namespace pocodom
