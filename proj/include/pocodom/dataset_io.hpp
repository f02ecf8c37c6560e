#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pocodom/geometry.hpp"
#include "pocodom/pipeline.hpp"

namespace pocodom {

/// Reads a scan of little-endian float32 (x, y, z, reflectance) records.
/// Non-finite points are dropped and counted in `dropped_non_finite`.
PointCloud read_kitti_scan(const std::filesystem::path& path, std::size_t* dropped_non_finite = nullptr);
void write_kitti_scan(const std::filesystem::path& path, const PointCloud& cloud);

/// One 3x4 row-major [R|t] per line. Rotations off orthonormal by less than
/// 1e-3 are projected back; anything worse is MalformedPose.
std::vector<RigidTransform> read_kitti_poses(const std::filesystem::path& path);
std::vector<RigidTransform> parse_kitti_poses(const std::string& text);

enum class TrajectoryFormat { Kitti12, Tum8 };
TrajectoryFormat parse_trajectory_format(const std::string& name);

/// TUM timestamps are sweep_index * sweep_period seconds.
std::string format_trajectory(const Trajectory& trajectory, TrajectoryFormat format, double sweep_period = 0.1);
void write_trajectory(const Trajectory& trajectory, const std::filesystem::path& path, TrajectoryFormat format,
                      double sweep_period = 0.1);

enum class MapFormat { PcdAscii, Xyz };
MapFormat parse_map_format(const std::string& name);
void write_map(const std::vector<Point3>& points, const std::filesystem::path& path, MapFormat format);

/// "Tr:" line of a KITTI calib file: sensor-to-camera extrinsic.
RigidTransform read_velo_to_cam(const std::filesystem::path& calib_path);

/// Expresses camera-frame poses in the lidar frame: Tr^-1 * P * Tr.
std::vector<RigidTransform> camera_poses_to_lidar(const std::vector<RigidTransform>& poses,
                                                  const RigidTransform& velo_to_cam);

/// A sequence directory: scans in <root>/velodyne or <root>, sorted by
/// numeric stem; optional poses.txt and calib.txt next to them.
struct SweepSource {
  std::vector<std::filesystem::path> scans;
  std::optional<std::filesystem::path> poses;
  std::optional<std::filesystem::path> calib;

  static SweepSource open(const std::filesystem::path& root);
  std::size_t size() const { return scans.size(); }
  PointCloud load(std::size_t index, std::size_t* dropped_non_finite = nullptr) const;
};

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace pocodom
