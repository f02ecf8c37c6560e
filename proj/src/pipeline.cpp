#include "pocodom/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>

#include "pocodom/error.hpp"

namespace pocodom {

namespace {

std::vector<Point3> thin(const std::vector<Point3>& points, double voxel) {
  return voxel > 0.0 ? voxel_downsample(points, voxel) : points;
}

bool disagrees(const RigidTransform& a, const RigidTransform& b, const PipelineConfig& config) {
  const RigidTransform d = a.inverse() * b;
  return d.translation().norm() > config.prior_translation_gate || d.rotation_angle() > config.prior_rotation_gate;
}

}  // namespace

IcpTarget build_registration_target(const PreparedSweep& prep, const PipelineConfig& config) {
  if (prep.filtered_is_raw) {
    return IcpTarget(estimate_normals(prep.filtered, config.icp.normal_neighbors, Point3::Zero()));
  }
  const PointCloud& non_ground = prep.non_ground;
  const PointCloud& ground = prep.ground;
  const Plane& plane = prep.plane;
  PointCloud cloud = empty_like(non_ground);
  cloud.points = thin(non_ground.points, config.target_voxel);
  const std::size_t split = cloud.size();
  const std::vector<Point3> g = thin(ground.points, config.target_voxel);
  cloud.points.insert(cloud.points.end(), g.begin(), g.end());
  NormalCloud normals = estimate_normals(cloud, config.icp.normal_neighbors, Point3::Zero());

  // A k-neighbourhood on a ground ring sees one scan line, so its PCA normal
  // tilts along the beam. Ground points take the fitted plane normal instead.
  // Where the local normal is far from vertical the neighbourhood straddles
  // a wall or car base; those points are left out of matching.
  const Eigen::Vector3d up_axis = config.frame_convention.up_vector();
  const Eigen::Vector3d up = plane.normal.dot(up_axis) >= 0.0 ? plane.normal : Eigen::Vector3d(-plane.normal);
  constexpr double kCos45 = 0.7071067811865476;
  for (std::size_t i = split; i < cloud.size(); ++i) {
    const bool flat = normals.degenerate[i] || std::abs(normals.normals[i].dot(up)) >= kCos45;
    normals.normals[i] = up;
    normals.degenerate[i] = !flat;
  }
  return IcpTarget(std::move(normals));
}

void PipelineConfig::validate() const {
  ransac.validate();
  cluster.validate();
  grid.validate();
  icp.validate();
  poc.validate();
  if (frame_skip < 1) throw Error(ErrorCode::InvalidArgument, "frame_skip must be >= 1");
  if (target_voxel < 0.0) throw Error(ErrorCode::InvalidArgument, "target_voxel must be >= 0");
  if (!(prior_translation_gate > 0.0) || !(prior_rotation_gate > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "prior gates must be > 0");
  }
  if (refine_distance < 0.0) throw Error(ErrorCode::InvalidArgument, "refine_distance must be >= 0");
  if (map_voxel < 0.0) throw Error(ErrorCode::InvalidArgument, "map_voxel must be >= 0");
  if (!(ground_threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "ground_threshold must be > 0");
  if (!frame_convention.is_valid()) throw Error(ErrorCode::InvalidArgument, "invalid frame convention");
}

void Trajectory::append(std::size_t sweep_index, const RigidTransform& pose) {
  if (!poses.empty() && sweep_index <= poses.back().sweep_index) {
    throw Error(ErrorCode::InvalidArgument, "trajectory sweep indices must strictly increase");
  }
  poses.push_back({sweep_index, pose});
}

void MapCloud::insert(const PointCloud& world_cloud) {
  if (voxel_ <= 0.0) {
    points_.insert(points_.end(), world_cloud.points.begin(), world_cloud.points.end());
    return;
  }
  for (const Point3& p : world_cloud.points) {
    if (occupied_.insert(voxel_of(p, voxel_)).second) points_.push_back(p);
  }
}

MapCloud map_insert(MapCloud map, const PointCloud& cloud_world) {
  if (cloud_world.frame != FrameKind::World) {
    throw Error(ErrorCode::InvalidArgument, "map_insert expects a World-frame cloud");
  }
  map.insert(cloud_world);
  return map;
}

PreparedSweep prepare_sweep(const PointCloud& cloud, const PipelineConfig& config) {
  validate_cloud(cloud);
  const FrameConvention& conv = config.frame_convention;
  PreparedSweep out;
  // Ground plane. A failed fit falls back to the nominal plane at sensor height.
  Plane& plane = out.plane;
  try {
    const std::uint64_t seed = config.rng_seed ^ (0x9E3779B97F4A7C15ULL * (cloud.sweep_index + 1));
    plane = estimate_ground(cloud, config.ransac, conv, seed);
  } catch (const Error& e) {
    plane.normal = conv.up_vector();
    plane.offset = config.ransac.sensor_height;
    out.ground_fallback = true;
    out.note += std::string(e.what()) + "; ";
  }

  // Small-object removal (or just the ground split when disabled).
  PointCloud& non_ground = out.non_ground;
  PointCloud& ground = out.ground;
  if (config.enable_object_removal) {
    try {
      ObjectRemovalResult removed =
          remove_small_objects_detailed(cloud, plane, config.cluster, config.ground_threshold, conv);
      non_ground = std::move(removed.kept_non_ground);
      ground = std::move(removed.ground);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyResult) throw;
      out.note += std::string(e.what()) + "; ";
    }
  } else {
    GroundSplit split = split_ground(cloud, plane, config.ground_threshold);
    non_ground = std::move(split.non_ground);
    ground = std::move(split.ground);
  }
  PointCloud& filtered = out.filtered;
  filtered = non_ground;
  filtered.points.insert(filtered.points.end(), ground.points.begin(), ground.points.end());
  filtered.sweep_index = cloud.sweep_index;
  if (filtered.size() < static_cast<std::size_t>(config.icp.normal_neighbors) + 1) {
    // Too little left to register against; use the raw sweep.
    filtered = cloud;
    out.filtered_is_raw = true;
    out.note += "filtered cloud too small, using raw sweep; ";
  }

  // Rectify and rasterize.
  RigidTransform& rectification = out.rectification;
  try {
    rectification = shortest_arc(plane.normal, conv.up_vector());
  } catch (const Error& e) {
    out.ground_fallback = true;
    out.note += std::string(e.what()) + "; ";
  }
  std::optional<OccupancyGrid>& grid = out.grid;
  try {
    const PointCloud& to_grid = config.grid.include_ground || non_ground.empty() ? filtered : non_ground;
    grid = rasterize(apply(rectification, to_grid), config.grid, conv);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyGrid) throw;
    out.note += std::string(e.what()) + "; ";
  }

  return out;
}

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)), map_(config_.map_voxel) {
  config_.validate();
}

SweepReport Pipeline::process_sweep(const PointCloud& cloud) {
  const auto start = std::chrono::steady_clock::now();
  const FrameConvention& conv = config_.frame_convention;

  SweepReport report;
  report.sweep_index = cloud.sweep_index;
  report.input_points = cloud.size();
  if (!trajectory_.empty() && cloud.sweep_index <= trajectory_.poses.back().sweep_index) {
    throw Error(ErrorCode::InvalidArgument, "sweeps must arrive in increasing index order");
  }

  PreparedSweep prep = prepare_sweep(cloud, config_);
  report.ground_fallback = prep.ground_fallback;
  report.note = prep.note;
  report.filtered_points = prep.filtered.size();
  const RigidTransform& rectification = prep.rectification;
  std::optional<OccupancyGrid>& grid = prep.grid;

  // Built now so the source can use the same point selection: a source point
  // the target would refuse to match (wall base, no stable normal) only adds
  // one-sided residuals.
  IcpTarget target = build_registration_target(prep, config_);
  PointCloud filtered = empty_like(prep.filtered);
  filtered.points = target.usable_points();

  RigidTransform relative;
  if (previous_) {
    // Coarse 3-DOF estimate on the rectified grids, conjugated back into the
    // unrectified sensor frames of both sweeps.
    RigidTransform init;
    bool coarse_ok = false;
    if (grid) {
      const CoarseTransform coarse = estimate_coarse(previous_->grid, *grid, conv, config_.poc);
      report.coarse_theta = coarse.theta;
      report.coarse_confidence = coarse.confidence;
      if (!coarse.low_confidence) {
        init = previous_->rectification.inverse() * coarse.transform * rectification;
        report.coarse_init = init;
        coarse_ok = true;
      }
    }
    report.coarse_fallback = !coarse_ok;

    try {
      IcpResult icp = point_to_plane_icp(filtered, previous_->target, init, config_.icp);
      if (last_relative_ && disagrees(icp.transform, *last_relative_, config_)) {
        // A repeated facade can put the correlation peak a whole building
        // off. Retry from the constant-velocity guess and keep the better fit.
        try {
          IcpResult alt = point_to_plane_icp(filtered, previous_->target, *last_relative_, config_.icp);
          if (alt.objective_history.back() < icp.objective_history.back()) {
            icp = std::move(alt);
            report.velocity_init = true;
          }
        } catch (const Error& e) {
          if (e.code() != ErrorCode::SingularSystem && e.code() != ErrorCode::NoCorrespondences) throw;
        }
      }
      if (config_.refine_distance > 0.0) {
        // The wide gate lets unmatched structure pull the fit a little off;
        // a second pass with a tight gate removes that bias.
        IcpParams fine = config_.icp;
        fine.max_correspondence_distance = config_.refine_distance;
        try {
          IcpResult refined = point_to_plane_icp(filtered, previous_->target, icp.transform, fine);
          refined.iterations_used += icp.iterations_used;
          icp = std::move(refined);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::SingularSystem && e.code() != ErrorCode::NoCorrespondences) throw;
        }
      }
      relative = icp.transform;
      report.icp_rmse = icp.final_rmse;
      report.icp_iterations = icp.iterations_used;
      report.icp_correspondences = icp.correspondence_count;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularSystem && e.code() != ErrorCode::NoCorrespondences) throw;
      report.icp_fallback = true;
      report.note += std::string(e.what()) + "; ";
      if (coarse_ok || !last_relative_) {
        relative = init;
      } else {
        relative = *last_relative_;
        report.constant_velocity = true;
      }
    }
    report.degraded = report.coarse_fallback || report.icp_fallback || report.ground_fallback;
  }

  const RigidTransform pose = previous_ ? accumulator_.push(relative) : RigidTransform::identity();
  trajectory_.append(cloud.sweep_index, pose);
  relatives_.push_back(relative);
  if (previous_) last_relative_ = relative;
  map_.insert(apply(pose, cloud, FrameKind::World));

  // The new sweep becomes the registration target for the next one.
  if (!grid) {
    // Keep the last usable grid so the next sweep can still be matched.
    grid = previous_ ? std::optional<OccupancyGrid>(previous_->grid) : std::nullopt;
  }
  if (grid) {
    previous_.emplace(SweepRecord{cloud.sweep_index, std::move(target), std::move(*grid), rectification});
  } else {
    throw Error(ErrorCode::EmptyGrid, "first sweep produced no occupancy grid");
  }

  report.pose = pose;
  report.relative = relative;
  report.cycle_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

RunResult run_sequence(std::size_t sweep_count, const SweepLoader& load, const PipelineConfig& config,
                       const ProgressCallback& progress) {
  if (sweep_count == 0) throw Error(ErrorCode::EmptyCloud, "sequence holds no sweeps");
  Pipeline pipeline(config);
  RunResult result;
  const auto skip = static_cast<std::size_t>(config.frame_skip);
  for (std::size_t i = 0; i < sweep_count; i += skip) {
    SweepReport report;
    try {
      PointCloud cloud = load(i);
      cloud.sweep_index = i;
      report = pipeline.process_sweep(cloud);
    } catch (const Error& e) {
      report = SweepReport{};
      report.sweep_index = i;
      report.skipped = true;
      report.degraded = true;
      report.note = e.what();
    }
    if (progress) progress(report);
    result.reports.push_back(std::move(report));
  }
  result.trajectory = pipeline.trajectory();
  result.map = pipeline.map();
  return result;
}

RunResult run_sequence(const std::vector<PointCloud>& sweeps, const PipelineConfig& config) {
  return run_sequence(sweeps.size(), [&](std::size_t i) { return sweeps[i]; }, config);
}

std::string run_report_header() {
  return "sweep,tx,ty,tz,yaw_rad,coarse_theta_rad,coarse_confidence,icp_rmse,icp_iterations,icp_correspondences,"
         "input_points,filtered_points,ground_fallback,coarse_fallback,icp_fallback,constant_velocity,velocity_init,"
         "degraded,"
         "skipped,cycle_ms,note";
}

std::string format_run_report_row(const SweepReport& r) {
  const Eigen::Vector3d& t = r.pose.translation();
  const double yaw = std::atan2(r.pose.rotation()(1, 0), r.pose.rotation()(0, 0));
  std::string note = r.note;
  for (char& c : note) {
    if (c == ',' || c == '\n') c = ' ';
  }
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g,%.9g,%.9g,%.9g,%.6g,%.6g,%d,%zu,%zu,%zu,%d,%d,%d,%d,%d,%d,%d,%.3f,",
                r.sweep_index, t.x(), t.y(), t.z(), yaw, r.coarse_theta, r.coarse_confidence, r.icp_rmse,
                r.icp_iterations, r.icp_correspondences, r.input_points, r.filtered_points, r.ground_fallback,
                r.coarse_fallback, r.icp_fallback, r.constant_velocity, r.velocity_init, r.degraded, r.skipped, r.cycle_ms);
  return buf + note;
}

std::string format_run_report(const std::vector<SweepReport>& reports, const std::string& config_echo) {
  std::ostringstream out;
  std::istringstream lines(config_echo);
  for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
  out << run_report_header() << '\n';
  for (const SweepReport& r : reports) out << format_run_report_row(r) << '\n';
  return out.str();
}

}  // namespace pocodom
