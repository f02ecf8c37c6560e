#include "pocodom/ground_plane.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "pocodom/error.hpp"

namespace pocodom {

namespace {

constexpr int kMaxRefinementRounds = 20;

struct IterationScore {
  bool valid = false;
  Plane plane;
  std::size_t inliers = 0;
  double distance_sum = 0.0;
};

// Plane stats over `points`, restricted to |distance| <= threshold.
void score_plane(Plane& plane, const std::vector<Point3>& points, double threshold) {
  std::size_t count = 0;
  double sum = 0.0;
  for (const Point3& p : points) {
    const double d = std::abs(plane.signed_distance(p));
    if (d <= threshold) {
      ++count;
      sum += d;
    }
  }
  plane.inlier_count = count;
  plane.mean_inlier_distance = count > 0 ? sum / static_cast<double>(count) : 0.0;
}

std::vector<std::size_t> inlier_indices(const Plane& plane, const std::vector<Point3>& points, double threshold) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (std::abs(plane.signed_distance(points[i])) <= threshold) idx.push_back(i);
  }
  return idx;
}

Plane orient_up(Plane plane, const Eigen::Vector3d& up) {
  if (plane.normal.dot(up) < 0.0) {
    plane.normal = -plane.normal;
    plane.offset = -plane.offset;
  }
  return plane;
}

}  // namespace

void RansacParams::validate() const {
  if (iterations < 1) throw Error(ErrorCode::InvalidArgument, "ransac iterations must be >= 1");
  if (sample_size < 3) throw Error(ErrorCode::InvalidArgument, "ransac sample_size must be >= 3");
  if (!(distance_threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "ransac distance_threshold must be > 0");
  if (!(candidate_height_band > 0.0)) throw Error(ErrorCode::InvalidArgument, "candidate_height_band must be > 0");
}

Plane fit_plane_tls(const std::vector<Point3>& points) {
  if (points.size() < 3) throw Error(ErrorCode::DegenerateSample, "need at least 3 points to fit a plane");
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const Point3& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Point3& p : points) {
    const Eigen::Vector3d d = p - centroid;
    cov.noalias() += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const Eigen::Vector3d& values = eig.eigenvalues();
  // Rank < 2 means the points are (nearly) collinear and span no plane.
  if (!(values[1] > 1e-12 * std::max(values[2], 1e-300))) {
    throw Error(ErrorCode::DegenerateSample, "points are collinear");
  }
  Plane plane;
  plane.normal = eig.eigenvectors().col(0).normalized();
  plane.offset = -plane.normal.dot(centroid);
  return plane;
}

GroundEstimate estimate_ground_detailed(const PointCloud& cloud, const RansacParams& params,
                                        const FrameConvention& conv, std::uint64_t seed, Exec exec) {
  params.validate();
  if (!conv.is_valid()) throw Error(ErrorCode::InvalidArgument, "invalid frame convention");

  const double lo = -params.sensor_height - params.candidate_height_band;
  const double hi = -params.sensor_height + params.candidate_height_band;
  std::vector<Point3> candidates;
  for (const Point3& p : cloud.points) {
    const double h = conv.up.of(p);
    if (h >= lo && h <= hi) candidates.push_back(p);
  }
  const auto sample_size = static_cast<std::size_t>(params.sample_size);
  if (candidates.size() < sample_size) {
    throw Error(ErrorCode::InsufficientCandidates,
                std::to_string(candidates.size()) + " points in the ground band, need " + std::to_string(sample_size));
  }

  std::vector<IterationScore> scores(static_cast<std::size_t>(params.iterations));
  for_each_index(exec, scores.size(), [&](std::size_t it) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(it)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    std::vector<std::size_t> chosen;
    chosen.reserve(sample_size);
    while (chosen.size() < sample_size) {
      const std::size_t i = pick(rng);
      if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) chosen.push_back(i);
    }

    IterationScore& score = scores[it];
    Plane plane;
    if (sample_size == 3) {
      const Point3& a = candidates[chosen[0]];
      const Eigen::Vector3d n = (candidates[chosen[1]] - a).cross(candidates[chosen[2]] - a);
      const double scale = (candidates[chosen[1]] - a).norm() * (candidates[chosen[2]] - a).norm();
      if (!(n.norm() > 1e-9 * scale) || scale == 0.0) return;
      plane.normal = n.normalized();
      plane.offset = -plane.normal.dot(a);
    } else {
      std::vector<Point3> sample;
      for (std::size_t i : chosen) sample.push_back(candidates[i]);
      try {
        plane = fit_plane_tls(sample);
      } catch (const Error&) {
        return;
      }
    }
    score_plane(plane, candidates, params.distance_threshold);
    score.valid = true;
    score.plane = plane;
    score.inliers = plane.inlier_count;
  });

  GroundEstimate result;
  result.candidate_count = candidates.size();
  const IterationScore* best = nullptr;
  for (std::size_t it = 0; it < scores.size(); ++it) {
    const IterationScore& s = scores[it];
    if (!s.valid) continue;
    if (best == nullptr || s.inliers > best->inliers ||
        (s.inliers == best->inliers && s.plane.mean_inlier_distance < best->plane.mean_inlier_distance)) {
      best = &s;
      result.winning_iteration = static_cast<int>(it);
    }
  }
  if (best == nullptr) throw Error(ErrorCode::DegenerateSample, "every RANSAC sample was degenerate");

  // Refit on the winner's inliers over the whole cloud, then iterate
  // (inliers of the refit plane -> refit) until the inlier set is stable.
  // The fixpoint depends only on the geometry, so it commutes with rotating
  // the cloud.
  Plane sample_plane = orient_up(best->plane, conv.up_vector());
  score_plane(sample_plane, cloud.points, params.distance_threshold);
  result.sample_plane = sample_plane;

  Plane plane = sample_plane;
  std::vector<std::size_t> inliers = inlier_indices(plane, cloud.points, params.distance_threshold);
  for (int round = 0; round < kMaxRefinementRounds; ++round) {
    std::vector<Point3> support;
    support.reserve(inliers.size());
    for (std::size_t i : inliers) support.push_back(cloud.points[i]);
    Plane refit;
    try {
      refit = fit_plane_tls(support);
    } catch (const Error&) {
      break;
    }
    plane = orient_up(refit, conv.up_vector());
    result.refinement_rounds = round + 1;
    std::vector<std::size_t> next = inlier_indices(plane, cloud.points, params.distance_threshold);
    if (next == inliers) break;
    inliers = std::move(next);
  }
  score_plane(plane, cloud.points, params.distance_threshold);
  result.plane = plane;
  return result;
}

Plane estimate_ground(const PointCloud& cloud, const RansacParams& params, const FrameConvention& conv,
                      std::uint64_t seed, Exec exec) {
  return estimate_ground_detailed(cloud, params, conv, seed, exec).plane;
}

GroundSplit split_ground(const PointCloud& cloud, const Plane& plane, double threshold) {
  GroundSplit split{empty_like(cloud), empty_like(cloud)};
  for (const Point3& p : cloud.points) {
    if (std::abs(plane.signed_distance(p)) <= threshold) {
      split.ground.points.push_back(p);
    } else {
      split.non_ground.points.push_back(p);
    }
  }
  return split;
}

RigidTransform shortest_arc(const Eigen::Vector3d& normal, const Eigen::Vector3d& up) {
  const Eigen::Vector3d n = normal.normalized();
  const Eigen::Vector3d u = up.normalized();
  const double c = n.dot(u);
  if (c <= -1.0 + 1e-9) throw Error(ErrorCode::DegenerateNormal, "ground normal points opposite to up");
  const Eigen::Vector3d axis = n.cross(u);
  const double angle = std::atan2(axis.norm(), c);
  if (angle < 1e-9) return RigidTransform::identity();
  return RigidTransform::rotation_about(axis, angle);
}

Rectified rectify(const PointCloud& cloud, const Plane& plane, const FrameConvention& conv) {
  RigidTransform r = shortest_arc(plane.normal, conv.up_vector());
  return {apply(r, cloud), r};
}

}  // namespace pocodom
