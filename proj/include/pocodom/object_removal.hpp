#pragma once

#include <cstddef>
#include <vector>

#include "pocodom/geometry.hpp"
#include "pocodom/ground_plane.hpp"
#include "pocodom/parallel.hpp"

namespace pocodom {

/// Per-axis bounding-box limits in vehicle axes.
struct Extent3 {
  double forward = 10.0;
  double left = 10.0;
  double up = 4.0;
};

struct ClusterParams {
  double eps = 0.5;
  int min_pts = 10;
  /// A cluster is "small" when its box is strictly below these on every axis.
  Extent3 max_extent;

  void validate() const;
};

struct ClusterLabeling {
  static constexpr int kNoise = -1;

  std::vector<int> labels;
  std::vector<bool> core;
  int cluster_count = 0;
};

/// DBSCAN. A point is core when at least min_pts points (itself included) lie
/// within eps. Points are scanned in ascending index order, so a border point
/// joins the lowest-numbered cluster that has a core point within eps of it.
ClusterLabeling dbscan(const PointCloud& cloud, double eps, int min_pts, Exec exec = Exec::Parallel);

/// Core flags only (the data-parallel half of DBSCAN).
std::vector<bool> dbscan_core_flags(const std::vector<Point3>& points, double eps, int min_pts,
                                    Exec exec = Exec::Parallel);

/// Drops noise and every cluster whose box fits strictly inside max_extent.
PointCloud filter_small_clusters(const PointCloud& cloud, const ClusterLabeling& labeling,
                                 const ClusterParams& params, const FrameConvention& conv);

struct ObjectRemovalResult {
  PointCloud kept_non_ground;
  PointCloud ground;
  ClusterLabeling labeling;

  /// kept_non_ground followed by ground.
  PointCloud merged() const;
};

ObjectRemovalResult remove_small_objects_detailed(const PointCloud& cloud, const Plane& plane,
                                                  const ClusterParams& params, double ground_threshold,
                                                  const FrameConvention& conv, Exec exec = Exec::Parallel);

/// Ground split, DBSCAN on the non-ground part, small-cluster filtering, then
/// the ground points re-attached. Throws EmptyResult when nothing survives.
PointCloud remove_small_objects(const PointCloud& cloud, const Plane& plane, const ClusterParams& params,
                                double ground_threshold, const FrameConvention& conv,
                                Exec exec = Exec::Parallel);

}  // namespace pocodom
