#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>

#include "pocodom/geometry.hpp"
#include "pocodom/parallel.hpp"

namespace pocodom {

/// Plane {p : normal . p + offset = 0} with the statistics of its inlier set.
struct Plane {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double offset = 0.0;
  std::size_t inlier_count = 0;
  double mean_inlier_distance = 0.0;

  double signed_distance(const Point3& p) const { return normal.dot(p) + offset; }
};

struct RansacParams {
  int iterations = 100;
  int sample_size = 3;
  double distance_threshold = 0.2;
  /// Expected height of the sensor above the ground (KITTI: 1.73 m).
  double sensor_height = 1.73;
  /// Half-width of the band around -sensor_height (along up) that samples
  /// are drawn from.
  double candidate_height_band = 0.5;

  void validate() const;
};

struct GroundEstimate {
  Plane plane;
  /// Plane through the winning minimal sample, with its own inlier stats.
  Plane sample_plane;
  int winning_iteration = -1;
  std::size_t candidate_count = 0;
  int refinement_rounds = 0;
};

/// RANSAC over the candidate band followed by a total-least-squares refit.
/// Each iteration seeds its own generator from (seed, iteration), so the
/// serial and OpenMP evaluations pick the same winner.
GroundEstimate estimate_ground_detailed(const PointCloud& cloud, const RansacParams& params,
                                        const FrameConvention& conv, std::uint64_t seed,
                                        Exec exec = Exec::Parallel);

Plane estimate_ground(const PointCloud& cloud, const RansacParams& params, const FrameConvention& conv,
                      std::uint64_t seed = 0, Exec exec = Exec::Parallel);

/// Total-least-squares plane through the given points (smallest eigenvector
/// of the centred covariance). Inlier stats are left empty.
Plane fit_plane_tls(const std::vector<Point3>& points);

struct GroundSplit {
  PointCloud ground;
  PointCloud non_ground;
};

GroundSplit split_ground(const PointCloud& cloud, const Plane& plane, double threshold);

struct Rectified {
  PointCloud cloud;
  RigidTransform rectification;
};

/// Shortest-arc rotation taking `normal` onto `up`; identity below 1e-9 rad.
/// Throws DegenerateNormal when the two are (nearly) opposite.
RigidTransform shortest_arc(const Eigen::Vector3d& normal, const Eigen::Vector3d& up);

Rectified rectify(const PointCloud& cloud, const Plane& plane, const FrameConvention& conv);

}  // namespace pocodom
