#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "pocodom/geometry.hpp"
#include "pocodom/ground_plane.hpp"
#include "pocodom/icp.hpp"
#include "pocodom/object_removal.hpp"
#include "pocodom/occupancy_grid.hpp"
#include "pocodom/poc_matcher.hpp"
#include "pocodom/voxel_index.hpp"

namespace pocodom {

struct PipelineConfig {
  RansacParams ransac;
  ClusterParams cluster;
  /// Points within this distance of the ground plane count as ground.
  double ground_threshold = 0.2;
  GridParams grid;
  /// Consecutive sweeps never differ by a half turn, so the pipeline drops
  /// the theta + pi candidate (scenes with two-fold symmetry otherwise flip).
  PocParams poc = {.max_abs_rotation = 1.5707963267948966};
  IcpParams icp;
  /// Process every s-th sweep (index % s == 0).
  int frame_skip = 1;
  double map_voxel = 0.2;
  /// Voxel size used to thin the registration target before normal
  /// estimation (0 keeps every point).
  double target_voxel = 0.1;
  bool enable_object_removal = true;
  /// Correspondence gate of a second registration pass started from the
  /// first result (0 skips the pass).
  double refine_distance = 0.3;
  /// When the refined motion differs from the previous one by more than
  /// these, registration is also tried from the previous motion.
  double prior_translation_gate = 1.0;
  double prior_rotation_gate = 0.0872664626;
  std::uint64_t rng_seed = 0;
  FrameConvention frame_convention = FrameConvention::kitti();

  void validate() const;
};

struct TrajectoryEntry {
  std::size_t sweep_index = 0;
  RigidTransform pose;
};

struct Trajectory {
  std::vector<TrajectoryEntry> poses;

  std::size_t size() const { return poses.size(); }
  bool empty() const { return poses.empty(); }
  /// Throws InvalidArgument unless indices strictly increase.
  void append(std::size_t sweep_index, const RigidTransform& pose);
};

/// Accumulated world-frame map: union of inserted clouds with one point per
/// voxel (first insertion wins). voxel = 0 keeps every point.
class MapCloud {
 public:
  explicit MapCloud(double voxel = 0.0) : voxel_(voxel) {}

  void insert(const PointCloud& world_cloud);
  const std::vector<Point3>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  double voxel() const { return voxel_; }

 private:
  double voxel_;
  std::vector<Point3> points_;
  std::unordered_set<VoxelKey, VoxelKeyHash> occupied_;
};

MapCloud map_insert(MapCloud map, const PointCloud& cloud_world);

/// One row of the run report.
struct SweepReport {
  std::size_t sweep_index = 0;
  RigidTransform pose;
  /// Sweep-to-previous motion actually used.
  RigidTransform relative;
  double coarse_theta = 0.0;
  double coarse_confidence = 0.0;
  /// Coarse seed in the unrectified sensor frames (identity when rejected).
  RigidTransform coarse_init;
  double icp_rmse = 0.0;
  int icp_iterations = 0;
  std::size_t icp_correspondences = 0;
  std::size_t input_points = 0;
  std::size_t filtered_points = 0;
  bool ground_fallback = false;
  bool coarse_fallback = false;
  bool icp_fallback = false;
  bool constant_velocity = false;
  /// Registration seeded from the previous motion beat the coarse seed.
  bool velocity_init = false;
  bool degraded = false;
  bool skipped = false;
  std::string note;
  double cycle_ms = 0.0;
};

/// Per-sweep preprocessing shared by the pipeline and the diagnostics tools.
struct PreparedSweep {
  Plane plane;
  PointCloud non_ground;
  PointCloud ground;
  /// non_ground followed by ground, or the raw sweep if too little survived.
  PointCloud filtered;
  bool filtered_is_raw = false;
  /// Maps the sensor frame onto the ground-aligned frame.
  RigidTransform rectification;
  std::optional<OccupancyGrid> grid;
  bool ground_fallback = false;
  std::string note;
};

PreparedSweep prepare_sweep(const PointCloud& cloud, const PipelineConfig& config);

/// Thinned filtered points with normals, ground points carrying the plane
/// normal. This is what the next sweep registers against.
IcpTarget build_registration_target(const PreparedSweep& prep, const PipelineConfig& config);

/// Sequential odometry: each call consumes the next retained sweep.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);

  SweepReport process_sweep(const PointCloud& cloud);

  const PipelineConfig& config() const { return config_; }
  const Trajectory& trajectory() const { return trajectory_; }
  const MapCloud& map() const { return map_; }
  /// Relative transforms in processing order; pose k is their running product.
  const std::vector<RigidTransform>& relatives() const { return relatives_; }

 private:
  struct SweepRecord {
    std::size_t sweep_index = 0;
    IcpTarget target;
    OccupancyGrid grid;
    RigidTransform rectification;
  };

  PipelineConfig config_;
  std::optional<SweepRecord> previous_;
  Trajectory trajectory_;
  MapCloud map_;
  PoseAccumulator accumulator_;
  std::vector<RigidTransform> relatives_;
  std::optional<RigidTransform> last_relative_;
};

struct RunResult {
  Trajectory trajectory;
  MapCloud map;
  std::vector<SweepReport> reports;
};

/// Loads sweep i on demand. May throw; the sweep is then reported as
/// skipped and the run continues.
using SweepLoader = std::function<PointCloud(std::size_t index)>;
using ProgressCallback = std::function<void(const SweepReport&)>;

RunResult run_sequence(std::size_t sweep_count, const SweepLoader& load, const PipelineConfig& config,
                       const ProgressCallback& progress = {});
RunResult run_sequence(const std::vector<PointCloud>& sweeps, const PipelineConfig& config);

/// Comma-separated run report with the effective config echoed as leading
/// '#' lines.
std::string format_run_report(const std::vector<SweepReport>& reports, const std::string& config_echo);
std::string run_report_header();
std::string format_run_report_row(const SweepReport& r);

}  // namespace pocodom
