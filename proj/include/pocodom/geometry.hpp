#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstddef>
#include <vector>

namespace pocodom {

using Point3 = Eigen::Vector3d;

enum class FrameKind { Lidar, World };

/// One sweep (or a derived point set). In the Lidar frame `sweep_index` names
/// the sweep whose sensor origin the coordinates are relative to.
struct PointCloud {
  std::vector<Point3> points;
  FrameKind frame = FrameKind::Lidar;
  std::size_t sweep_index = 0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// A cloud with the same frame tag and no points.
PointCloud empty_like(const PointCloud& cloud);

/// Throws EmptyCloud / InvalidArgument when the cloud is empty or holds a
/// non-finite coordinate.
void validate_cloud(const PointCloud& cloud);

/// SE(3) element stored as rotation + translation. Acts on points as R p + t.
class RigidTransform {
 public:
  RigidTransform() : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()) {}
  RigidTransform(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
      : rotation_(rotation), translation_(translation) {}

  static RigidTransform identity() { return {}; }
  static RigidTransform translation(const Eigen::Vector3d& t) { return {Eigen::Matrix3d::Identity(), t}; }
  static RigidTransform rotation_about(const Eigen::Vector3d& axis, double angle_rad);
  /// Builds from a 4x4 homogeneous matrix; throws InvalidArgument when the
  /// upper-left block is not a proper rotation within `tolerance`.
  static RigidTransform from_matrix(const Eigen::Matrix4d& m, double tolerance = 1e-9);

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }
  Eigen::Matrix4d matrix() const;

  RigidTransform inverse() const;
  Point3 operator*(const Point3& p) const { return rotation_ * p + translation_; }
  /// Applies `rhs` first, then `*this`.
  RigidTransform operator*(const RigidTransform& rhs) const;

  /// Angle of the rotation part in radians, in [0, pi].
  double rotation_angle() const;
  /// Replaces the rotation with its nearest orthonormal matrix (polar factor).
  RigidTransform orthonormalized() const;
  bool is_valid(double tolerance = 1e-9) const;

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);
/// Maps every point through `t`; the result is tagged with `frame`.
PointCloud apply(const RigidTransform& t, const PointCloud& cloud, FrameKind frame);
PointCloud apply(const RigidTransform& t, const PointCloud& cloud);

/// Nearest rotation matrix in the Frobenius sense, via SVD.
Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m);

/// Signed coordinate axis: index 0..2 and sign +1/-1.
struct SignedAxis {
  int index = 0;
  int sign = 1;

  Eigen::Vector3d unit() const;
  double of(const Point3& p) const { return sign * p[index]; }
  bool operator==(const SignedAxis&) const = default;
};

/// How a cloud's coordinate axes relate to the vehicle's up, forward and
/// left directions.
struct FrameConvention {
  SignedAxis up{2, 1};
  SignedAxis forward{0, 1};
  SignedAxis left{1, 1};

  /// x-forward, y-left, z-up (KITTI velodyne).
  static FrameConvention kitti() { return {}; }
  /// x-left, y-up, z-forward.
  static FrameConvention lidar_xleft_yup_zforward() { return {{1, 1}, {2, 1}, {0, 1}}; }

  /// True when the axes are distinct and forward x left = up.
  bool is_valid() const;
  bool operator==(const FrameConvention&) const = default;

  Eigen::Vector3d up_vector() const { return up.unit(); }
  Eigen::Vector3d forward_vector() const { return forward.unit(); }
  Eigen::Vector3d left_vector() const { return left.unit(); }
};

/// Relabels axes from one convention to another. Only permutes and negates
/// coordinates, so round trips are exact.
PointCloud convert_frame(const PointCloud& cloud, const FrameConvention& from, const FrameConvention& to);

/// Chains relative transforms onto an absolute pose, re-orthonormalizing
/// every `period` compositions to keep accumulated rounding bounded.
class PoseAccumulator {
 public:
  explicit PoseAccumulator(std::size_t period = 100) : period_(period) {}

  const RigidTransform& pose() const { return pose_; }
  const RigidTransform& push(const RigidTransform& relative);

 private:
  RigidTransform pose_;
  std::size_t period_;
  std::size_t count_ = 0;
};

}  // namespace pocodom
