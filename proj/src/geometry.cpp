#include "pocodom/geometry.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

#include "pocodom/error.hpp"

namespace pocodom {

PointCloud empty_like(const PointCloud& cloud) {
  PointCloud out;
  out.frame = cloud.frame;
  out.sweep_index = cloud.sweep_index;
  return out;
}

void validate_cloud(const PointCloud& cloud) {
  if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "point cloud has no points");
  for (const Point3& p : cloud.points) {
    if (!p.allFinite()) throw Error(ErrorCode::InvalidArgument, "point cloud holds a non-finite coordinate");
  }
}

RigidTransform RigidTransform::rotation_about(const Eigen::Vector3d& axis, double angle_rad) {
  return {Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix(), Eigen::Vector3d::Zero()};
}

RigidTransform RigidTransform::from_matrix(const Eigen::Matrix4d& m, double tolerance) {
  RigidTransform t(m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>());
  if (!t.is_valid(tolerance)) throw Error(ErrorCode::InvalidArgument, "matrix is not a rigid transform");
  return t;
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

RigidTransform RigidTransform::inverse() const {
  const Eigen::Matrix3d rt = rotation_.transpose();
  return {rt, -(rt * translation_)};
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
  return {rotation_ * rhs.rotation_, rotation_ * rhs.translation_ + translation_};
}

double RigidTransform::rotation_angle() const {
  const double c = std::clamp((rotation_.trace() - 1.0) / 2.0, -1.0, 1.0);
  // acos loses precision near zero; recover the small-angle regime from the
  // skew-symmetric part instead.
  const Eigen::Vector3d skew(rotation_(2, 1) - rotation_(1, 2), rotation_(0, 2) - rotation_(2, 0),
                             rotation_(1, 0) - rotation_(0, 1));
  return std::atan2(0.5 * skew.norm(), c);
}

RigidTransform RigidTransform::orthonormalized() const { return {nearest_rotation(rotation_), translation_}; }

bool RigidTransform::is_valid(double tolerance) const {
  if (!rotation_.allFinite() || !translation_.allFinite()) return false;
  const Eigen::Matrix3d gram = rotation_.transpose() * rotation_;
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tolerance) return false;
  return std::abs(rotation_.determinant() - 1.0) <= tolerance;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) { return a * b; }

RigidTransform invert(const RigidTransform& t) { return t.inverse(); }

PointCloud apply(const RigidTransform& t, const PointCloud& cloud, FrameKind frame) {
  PointCloud out;
  out.frame = frame;
  out.sweep_index = cloud.sweep_index;
  out.points.reserve(cloud.size());
  const Eigen::Matrix3d& r = t.rotation();
  const Eigen::Vector3d& tr = t.translation();
  for (const Point3& p : cloud.points) out.points.push_back(r * p + tr);
  return out;
}

PointCloud apply(const RigidTransform& t, const PointCloud& cloud) { return apply(t, cloud, cloud.frame); }

Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return u * v.transpose();
}

Eigen::Vector3d SignedAxis::unit() const {
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  v[index] = sign;
  return v;
}

bool FrameConvention::is_valid() const {
  for (const SignedAxis& a : {up, forward, left}) {
    if (a.index < 0 || a.index > 2 || (a.sign != 1 && a.sign != -1)) return false;
  }
  if (up.index == forward.index || up.index == left.index || forward.index == left.index) return false;
  return forward_vector().cross(left_vector()) == up_vector();
}

PointCloud convert_frame(const PointCloud& cloud, const FrameConvention& from, const FrameConvention& to) {
  if (!from.is_valid() || !to.is_valid()) throw Error(ErrorCode::InvalidArgument, "invalid frame convention");
  if (from == to) return cloud;
  PointCloud out = empty_like(cloud);
  out.points.reserve(cloud.size());
  for (const Point3& p : cloud.points) {
    Point3 q;
    q[to.forward.index] = to.forward.sign * from.forward.of(p);
    q[to.left.index] = to.left.sign * from.left.of(p);
    q[to.up.index] = to.up.sign * from.up.of(p);
    out.points.push_back(q);
  }
  return out;
}

const RigidTransform& PoseAccumulator::push(const RigidTransform& relative) {
  pose_ = pose_ * relative;
  if (period_ > 0 && ++count_ % period_ == 0) pose_ = pose_.orthonormalized();
  return pose_;
}

}  // namespace pocodom
