#include "pocodom/icp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

#include "pocodom/error.hpp"
#include "pocodom/voxel_index.hpp"

namespace pocodom {

NormalCloud estimate_normals(const PointCloud& cloud, int k, const Point3& viewpoint, Exec exec) {
  if (k < 3) throw Error(ErrorCode::InvalidArgument, "normal estimation needs k >= 3");
  if (cloud.size() < static_cast<std::size_t>(k) + 1) {
    throw Error(ErrorCode::InvalidArgument, "normal estimation needs at least k + 1 points");
  }
  const KdTree tree(cloud.points);
  NormalCloud out;
  out.base = cloud;
  out.normals.assign(cloud.size(), Eigen::Vector3d::Zero());
  std::vector<char> degenerate(cloud.size(), 0);

  for_each_index(exec, cloud.size(), [&](std::size_t i) {
    const auto nbrs = tree.knn(cloud.points[i], static_cast<std::size_t>(k) + 1);
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& nb : nbrs) mean += cloud.points[nb.index];
    mean /= static_cast<double>(nbrs.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& nb : nbrs) {
      const Eigen::Vector3d d = cloud.points[nb.index] - mean;
      cov.noalias() += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig;
    eig.computeDirect(cov);
    const Eigen::Vector3d& ev = eig.eigenvalues();
    // Zero spread, or a neighbourhood strung along one line: no plane.
    if (!(ev[2] > 1e-12) || !(ev[1] > 1e-4 * ev[2])) {
      degenerate[i] = 1;
      out.normals[i] = Eigen::Vector3d::UnitZ();
      return;
    }
    Eigen::Vector3d n = eig.eigenvectors().col(0).normalized();
    if (n.dot(viewpoint - cloud.points[i]) < 0.0) n = -n;
    out.normals[i] = n;
  });
  out.degenerate.assign(degenerate.begin(), degenerate.end());
  return out;
}

IcpTarget::IcpTarget(NormalCloud cloud)
    : cloud_(std::make_unique<NormalCloud>(std::move(cloud))),
      usable_(std::make_unique<std::vector<std::size_t>>()),
      usable_points_(std::make_unique<std::vector<Point3>>()) {
  if (cloud_->normals.size() != cloud_->base.size() || cloud_->degenerate.size() != cloud_->base.size()) {
    throw Error(ErrorCode::InvalidArgument, "normal cloud arrays disagree in length");
  }
  for (std::size_t i = 0; i < cloud_->base.size(); ++i) {
    if (cloud_->degenerate[i]) continue;
    usable_->push_back(i);
    usable_points_->push_back(cloud_->base.points[i]);
  }
  tree_ = std::make_unique<KdTree>(*usable_points_);
}

void IcpParams::validate() const {
  if (max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "icp max_iterations must be >= 1");
  if (!(max_correspondence_distance > 0.0) || !(convergence_translation_eps > 0.0) ||
      !(convergence_rotation_eps > 0.0) || normal_neighbors < 3 || downsample_voxel < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "icp parameters must be positive");
  }
}

namespace {

struct Accumulator {
  Matrix6d h = Matrix6d::Zero();
  Vector6d g = Vector6d::Zero();
  double objective = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;
};

}  // namespace

IcpLinearization linearize(const std::vector<Point3>& source, const IcpTarget& target, const RigidTransform& t,
                           const IcpParams& params, Exec exec, std::vector<Correspondence>* pairs) {
  const double max_sq = params.max_correspondence_distance * params.max_correspondence_distance;
  const NormalCloud& tc = target.cloud();
  const Eigen::Matrix3d& rot = t.rotation();
  const Eigen::Vector3d& tr = t.translation();

  std::vector<std::size_t> matched;
  if (pairs != nullptr) matched.assign(source.size(), KdTree::kNone);

  const Accumulator acc = reduce_blocks(
      exec, source.size(), Accumulator{},
      [&](Accumulator& a, std::size_t i) {
        const Point3 p = rot * source[i] + tr;
        const KdTree::Neighbor nb = target.tree().nearest(p, max_sq);
        if (nb.index == KdTree::kNone) {
          a.objective += max_sq;
          return;
        }
        const std::size_t ti = target.usable_index(nb.index);
        const Eigen::Vector3d& n = tc.normals[ti];
        const double r = (p - tc.base.points[ti]).dot(n);
        Vector6d j;
        j.head<3>() = p.cross(n);
        j.tail<3>() = n;
        a.h.noalias() += j * j.transpose();
        a.g.noalias() += j * r;
        a.objective += r * r;
        a.sum_sq += r * r;
        ++a.count;
        if (!matched.empty()) matched[i] = ti;
      },
      [](Accumulator& total, const Accumulator& part) {
        total.h += part.h;
        total.g += part.g;
        total.objective += part.objective;
        total.sum_sq += part.sum_sq;
        total.count += part.count;
      });

  if (pairs != nullptr) {
    pairs->clear();
    for (std::size_t i = 0; i < matched.size(); ++i) {
      if (matched[i] != KdTree::kNone) pairs->push_back({i, matched[i]});
    }
  }
  IcpLinearization lin;
  lin.hessian = acc.h;
  lin.gradient_half = acc.g;
  lin.objective = acc.objective;
  lin.sum_sq_residual = acc.sum_sq;
  lin.count = acc.count;
  return lin;
}

RigidTransform increment_transform(const Vector6d& x) {
  const Eigen::Vector3d w = x.head<3>();
  const double angle = w.norm();
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  if (angle > 0.0) r = Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
  return {r, x.tail<3>()};
}

IcpResult point_to_plane_icp(const PointCloud& source, const IcpTarget& target, const RigidTransform& init,
                             const IcpParams& params, Exec exec) {
  params.validate();
  if (source.empty() || target.cloud().base.empty()) {
    throw Error(ErrorCode::EmptyCloud, "icp needs non-empty source and target");
  }
  const std::vector<Point3> src = voxel_downsample(source.points, params.downsample_voxel);

  IcpResult result;
  RigidTransform current = init;
  IcpLinearization lin = linearize(src, target, current, params, exec);
  auto require_pairs = [&](const IcpLinearization& l) {
    if (l.count < params.min_correspondences) {
      throw Error(ErrorCode::NoCorrespondences,
                  std::to_string(l.count) + " correspondences within " +
                      std::to_string(params.max_correspondence_distance) + " m");
    }
  };
  require_pairs(lin);
  result.objective_history.push_back(lin.objective);

  for (int it = 1; it <= params.max_iterations; ++it) {
    result.iterations_used = it;
    Eigen::SelfAdjointEigenSolver<Matrix6d> eig(lin.hessian, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues()[0], hi = eig.eigenvalues()[5];
    if (!(lo > 0.0) || hi / lo > params.max_condition) {
      throw Error(ErrorCode::SingularSystem, "point-to-plane system is rank deficient");
    }
    const Vector6d step = -lin.hessian.ldlt().solve(lin.gradient_half);

    // Step-halving keeps the objective non-increasing across accepted
    // iterations even when correspondences change under the step.
    bool accepted = false;
    double scale = 1.0;
    Vector6d applied = Vector6d::Zero();
    for (int h = 0; h <= params.max_step_halvings; ++h, scale *= 0.5) {
      const RigidTransform candidate = increment_transform(scale * step) * current;
      IcpLinearization next = linearize(src, target, candidate, params, exec);
      if (next.count >= params.min_correspondences && next.objective <= lin.objective) {
        current = candidate;
        lin = std::move(next);
        applied = scale * step;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No descent available along the Gauss-Newton direction.
      result.converged = step.tail<3>().norm() < params.convergence_translation_eps &&
                         step.head<3>().norm() < params.convergence_rotation_eps;
      break;
    }
    result.objective_history.push_back(lin.objective);
    if (applied.tail<3>().norm() < params.convergence_translation_eps &&
        applied.head<3>().norm() < params.convergence_rotation_eps) {
      result.converged = true;
      break;
    }
  }

  result.transform = current.orthonormalized();
  result.correspondence_count = lin.count;
  result.final_rmse = lin.count > 0 ? std::sqrt(lin.sum_sq_residual / static_cast<double>(lin.count)) : 0.0;
  return result;
}

IcpResult point_to_plane_icp(const PointCloud& source, const NormalCloud& target, const RigidTransform& init,
                             const IcpParams& params, Exec exec) {
  const IcpTarget t(target);
  return point_to_plane_icp(source, t, init, params, exec);
}

}  // namespace pocodom
