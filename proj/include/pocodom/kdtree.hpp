#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "pocodom/geometry.hpp"

namespace pocodom {

/// Static 3D k-d tree over a borrowed point array. The array must outlive
/// the tree and stay unmodified. Queries are const and thread-safe.
class KdTree {
 public:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  explicit KdTree(const std::vector<Point3>& points, std::size_t leaf_size = 12);

  struct Neighbor {
    std::size_t index = kNone;
    double sq_dist = std::numeric_limits<double>::infinity();
  };

  /// Nearest point with squared distance <= max_sq_dist, or index kNone.
  Neighbor nearest(const Point3& q, double max_sq_dist = std::numeric_limits<double>::infinity()) const;

  /// Up to k nearest points, sorted by (distance, index).
  std::vector<Neighbor> knn(const Point3& q, std::size_t k) const;

  std::size_t size() const { return points_->size(); }

 private:
  struct Node {
    // Leaf when axis < 0: [begin, end) into order_.
    int axis = -1;
    double split = 0.0;
    std::uint32_t begin = 0, end = 0;
    std::uint32_t left = 0, right = 0;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end);
  void nearest_rec(std::uint32_t node, const Point3& q, Neighbor& best) const;
  void knn_rec(std::uint32_t node, const Point3& q, std::size_t k, std::vector<Neighbor>& heap) const;

  const std::vector<Point3>* points_;
  std::size_t leaf_size_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace pocodom
