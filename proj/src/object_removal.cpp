#include "pocodom/object_removal.hpp"

#include <algorithm>
#include <deque>
#include <limits>

#include "pocodom/error.hpp"
#include "pocodom/voxel_index.hpp"

namespace pocodom {

namespace {
constexpr int kUnvisited = -2;
}

void ClusterParams::validate() const {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "cluster eps must be > 0");
  if (min_pts < 1) throw Error(ErrorCode::InvalidArgument, "cluster min_pts must be >= 1");
  if (!(max_extent.forward > 0.0 && max_extent.left > 0.0 && max_extent.up > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "cluster extents must be > 0");
  }
}

namespace {

std::vector<bool> core_flags(const VoxelIndex& index, const std::vector<Point3>& points, double eps, int min_pts,
                             Exec exec) {
  const auto need = static_cast<std::size_t>(min_pts);
  std::vector<char> core(points.size(), 0);
  for_each_index(exec, points.size(), [&](std::size_t i) {
    core[i] = index.count_within(points[i], eps, need) >= need ? 1 : 0;
  });
  return {core.begin(), core.end()};
}

}  // namespace

std::vector<bool> dbscan_core_flags(const std::vector<Point3>& points, double eps, int min_pts, Exec exec) {
  return core_flags(VoxelIndex(points, eps), points, eps, min_pts, exec);
}

ClusterLabeling dbscan(const PointCloud& cloud, double eps, int min_pts, Exec exec) {
  if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "dbscan on an empty cloud");
  if (!(eps > 0.0) || min_pts < 1) throw Error(ErrorCode::InvalidArgument, "dbscan needs eps > 0, min_pts >= 1");

  const std::vector<Point3>& pts = cloud.points;
  ClusterLabeling out;
  const VoxelIndex index(pts, eps);
  out.core = core_flags(index, pts, eps, min_pts, exec);
  out.labels.assign(pts.size(), kUnvisited);

  std::deque<std::size_t> frontier;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (out.labels[i] != kUnvisited) continue;
    if (!out.core[i]) {
      out.labels[i] = ClusterLabeling::kNoise;
      continue;
    }
    const int id = out.cluster_count++;
    out.labels[i] = id;
    frontier.push_back(i);
    while (!frontier.empty()) {
      const std::size_t q = frontier.front();
      frontier.pop_front();
      index.for_each_within(pts[q], eps, [&](std::size_t r) {
        if (out.labels[r] == ClusterLabeling::kNoise) {
          out.labels[r] = id;
        } else if (out.labels[r] == kUnvisited) {
          out.labels[r] = id;
          if (out.core[r]) frontier.push_back(r);
        }
      });
    }
  }
  return out;
}

PointCloud filter_small_clusters(const PointCloud& cloud, const ClusterLabeling& labeling,
                                 const ClusterParams& params, const FrameConvention& conv) {
  if (labeling.labels.size() != cloud.size()) {
    throw Error(ErrorCode::InvalidArgument, "labeling does not match cloud size");
  }
  PointCloud out = empty_like(cloud);
  if (cloud.empty()) return out;

  constexpr double inf = std::numeric_limits<double>::infinity();
  const auto clusters = static_cast<std::size_t>(labeling.cluster_count);
  std::vector<Eigen::Vector3d> lo(clusters, Eigen::Vector3d::Constant(inf));
  std::vector<Eigen::Vector3d> hi(clusters, Eigen::Vector3d::Constant(-inf));
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const int label = labeling.labels[i];
    if (label < 0) continue;
    const Point3& p = cloud.points[i];
    const Eigen::Vector3d v(conv.forward.of(p), conv.left.of(p), conv.up.of(p));
    lo[label] = lo[label].cwiseMin(v);
    hi[label] = hi[label].cwiseMax(v);
  }
  std::vector<bool> keep(clusters, false);
  for (std::size_t c = 0; c < clusters; ++c) {
    const Eigen::Vector3d ext = hi[c] - lo[c];
    const bool small = ext[0] < params.max_extent.forward && ext[1] < params.max_extent.left &&
                       ext[2] < params.max_extent.up;
    keep[c] = !small;
  }
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const int label = labeling.labels[i];
    if (label >= 0 && keep[static_cast<std::size_t>(label)]) out.points.push_back(cloud.points[i]);
  }
  return out;
}

PointCloud ObjectRemovalResult::merged() const {
  PointCloud out = kept_non_ground;
  out.points.insert(out.points.end(), ground.points.begin(), ground.points.end());
  return out;
}

ObjectRemovalResult remove_small_objects_detailed(const PointCloud& cloud, const Plane& plane,
                                                  const ClusterParams& params, double ground_threshold,
                                                  const FrameConvention& conv, Exec exec) {
  params.validate();
  GroundSplit split = split_ground(cloud, plane, ground_threshold);
  ObjectRemovalResult result;
  result.ground = std::move(split.ground);
  if (split.non_ground.empty()) {
    result.kept_non_ground = std::move(split.non_ground);
  } else {
    result.labeling = dbscan(split.non_ground, params.eps, params.min_pts, exec);
    result.kept_non_ground = filter_small_clusters(split.non_ground, result.labeling, params, conv);
  }
  if (result.kept_non_ground.empty() && result.ground.empty()) {
    throw Error(ErrorCode::EmptyResult, "small-object removal left no points");
  }
  return result;
}

PointCloud remove_small_objects(const PointCloud& cloud, const Plane& plane, const ClusterParams& params,
                                double ground_threshold, const FrameConvention& conv, Exec exec) {
  return remove_small_objects_detailed(cloud, plane, params, ground_threshold, conv, exec).merged();
}

}  // namespace pocodom
