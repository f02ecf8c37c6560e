#include "pocodom/kdtree.hpp"

#include <algorithm>
#include <numeric>

#include "pocodom/error.hpp"

namespace pocodom {

namespace {

bool closer(const KdTree::Neighbor& a, const KdTree::Neighbor& b) {
  return a.sq_dist < b.sq_dist || (a.sq_dist == b.sq_dist && a.index < b.index);
}

double sq_dist(const Point3& a, const Point3& b) {
  const double dx = a.x() - b.x(), dy = a.y() - b.y(), dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace

KdTree::KdTree(const std::vector<Point3>& points, std::size_t leaf_size)
    : points_(&points), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  if (points.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::InvalidArgument, "too many points for the k-d tree");
  }
  order_.resize(points.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * points.size() / leaf_size_ + 1);
  if (!points.empty()) build(0, static_cast<std::uint32_t>(points.size()));
}

std::uint32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(Node{});
  if (end - begin <= leaf_size_) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin((*points_)[order_[i]]);
    hi = hi.cwiseMax((*points_)[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] - lo[axis] <= 0.0) {
    // All points coincide; a leaf is the only sensible node.
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double va = (*points_)[a][axis], vb = (*points_)[b][axis];
                     return va < vb || (va == vb && a < b);
                   });
  const double split = (*points_)[order_[mid]][axis];
  const std::uint32_t left = build(begin, mid);
  const std::uint32_t right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

KdTree::Neighbor KdTree::nearest(const Point3& q, double max_sq_dist) const {
  Neighbor best;
  best.sq_dist = max_sq_dist;
  if (nodes_.empty()) return best;
  nearest_rec(0, q, best);
  if (best.index == kNone) best.sq_dist = std::numeric_limits<double>::infinity();
  return best;
}

void KdTree::nearest_rec(std::uint32_t id, const Point3& q, Neighbor& best) const {
  const Node& node = nodes_[id];
  if (node.axis < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const Neighbor cand{order_[i], sq_dist((*points_)[order_[i]], q)};
      if (cand.sq_dist <= best.sq_dist && (best.index == kNone || closer(cand, best))) best = cand;
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const std::uint32_t first = diff < 0 ? node.left : node.right;
  const std::uint32_t second = diff < 0 ? node.right : node.left;
  nearest_rec(first, q, best);
  if (diff * diff <= best.sq_dist) nearest_rec(second, q, best);
}

std::vector<KdTree::Neighbor> KdTree::knn(const Point3& q, std::size_t k) const {
  std::vector<Neighbor> heap;
  if (k == 0 || nodes_.empty()) return heap;
  heap.reserve(k + 1);
  knn_rec(0, q, k, heap);
  std::sort_heap(heap.begin(), heap.end(), closer);
  return heap;
}

void KdTree::knn_rec(std::uint32_t id, const Point3& q, std::size_t k, std::vector<Neighbor>& heap) const {
  const Node& node = nodes_[id];
  if (node.axis < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const Neighbor cand{order_[i], sq_dist((*points_)[order_[i]], q)};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end(), closer);
      } else if (closer(cand, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), closer);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), closer);
      }
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const std::uint32_t first = diff < 0 ? node.left : node.right;
  const std::uint32_t second = diff < 0 ? node.right : node.left;
  knn_rec(first, q, k, heap);
  if (heap.size() < k || diff * diff <= heap.front().sq_dist) knn_rec(second, q, k, heap);
}

}  // namespace pocodom
