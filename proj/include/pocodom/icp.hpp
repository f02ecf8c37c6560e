#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <memory>
#include <vector>

#include "pocodom/geometry.hpp"
#include "pocodom/kdtree.hpp"
#include "pocodom/parallel.hpp"

namespace pocodom {

using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Vector6d = Eigen::Matrix<double, 6, 1>;

struct NormalCloud {
  PointCloud base;
  std::vector<Eigen::Vector3d> normals;
  /// Neighbourhood was too flat to define a normal (zero covariance or all
  /// neighbours on one line). Such points never serve as ICP targets.
  std::vector<bool> degenerate;
};

/// PCA normals over the k nearest neighbours (plus the point itself),
/// oriented so normal . (viewpoint - point) >= 0.
NormalCloud estimate_normals(const PointCloud& cloud, int k, const Point3& viewpoint, Exec exec = Exec::Parallel);

/// Normal cloud plus a search tree over its non-degenerate points, built
/// once and shared read-only by every ICP iteration.
class IcpTarget {
 public:
  explicit IcpTarget(NormalCloud cloud);
  IcpTarget(IcpTarget&&) noexcept = default;
  IcpTarget& operator=(IcpTarget&&) noexcept = default;

  const NormalCloud& cloud() const { return *cloud_; }
  /// Tree over the usable points; its indices go through usable_index().
  const KdTree& tree() const { return *tree_; }
  std::size_t usable_index(std::size_t tree_index) const { return (*usable_)[tree_index]; }
  std::size_t usable_count() const { return usable_->size(); }
  const std::vector<Point3>& usable_points() const { return *usable_points_; }

 private:
  std::unique_ptr<NormalCloud> cloud_;
  std::unique_ptr<std::vector<std::size_t>> usable_;
  std::unique_ptr<std::vector<Point3>> usable_points_;
  std::unique_ptr<KdTree> tree_;
};

struct IcpParams {
  int max_iterations = 30;
  double max_correspondence_distance = 1.0;
  double convergence_translation_eps = 1e-4;
  double convergence_rotation_eps = 1e-4;
  int normal_neighbors = 20;
  /// Source voxel size; 0 keeps every source point.
  double downsample_voxel = 0.2;
  std::size_t min_correspondences = 10;
  double max_condition = 1e12;
  int max_step_halvings = 4;

  void validate() const;
};

struct IcpResult {
  /// Maps source coordinates into the target frame (initial guess included).
  RigidTransform transform;
  int iterations_used = 0;
  double final_rmse = 0.0;
  std::size_t correspondence_count = 0;
  bool converged = false;
  /// Objective after the initial guess and after every accepted step.
  std::vector<double> objective_history;
};

struct Correspondence {
  std::size_t source = 0;
  std::size_t target = 0;
};

/// Gauss-Newton normal equations of the point-to-plane objective at T, for a
/// left increment T <- [exp(w) | t] T with x = (w, t).
struct IcpLinearization {
  Matrix6d hessian = Matrix6d::Zero();
  /// sum J^T r; the objective gradient is 2 * gradient_half.
  Vector6d gradient_half = Vector6d::Zero();
  /// sum over matched points of r^2 plus max_dist^2 per unmatched point.
  double objective = 0.0;
  double sum_sq_residual = 0.0;
  std::size_t count = 0;
};

/// One correspondence pass at T (nearest valid target within the max
/// distance) and the accumulated normal equations.
IcpLinearization linearize(const std::vector<Point3>& source, const IcpTarget& target, const RigidTransform& t,
                           const IcpParams& params, Exec exec = Exec::Parallel,
                           std::vector<Correspondence>* pairs = nullptr);

/// Small-angle increment x = (w, t) as a rigid transform.
RigidTransform increment_transform(const Vector6d& x);

IcpResult point_to_plane_icp(const PointCloud& source, const IcpTarget& target, const RigidTransform& init,
                             const IcpParams& params, Exec exec = Exec::Parallel);
IcpResult point_to_plane_icp(const PointCloud& source, const NormalCloud& target, const RigidTransform& init,
                             const IcpParams& params, Exec exec = Exec::Parallel);

}  // namespace pocodom
