#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pocodom/geometry.hpp"
#include "pocodom/parallel.hpp"

namespace pocodom::synth {

struct Box {
  Eigen::Vector3d lo;
  Eigen::Vector3d hi;
};

/// Axis-aligned boxes standing on the plane z = ground_height (z up).
struct World {
  std::vector<Box> boxes;
  double ground_height = 0.0;
};

/// Spinning multi-beam scanner with evenly spaced elevations.
struct LidarModel {
  int beams = 16;
  double min_elevation_deg = -15.0;
  double max_elevation_deg = 15.0;
  int azimuth_steps = 900;
  double min_range = 1.0;
  double max_range = 80.0;
  double range_noise = 0.01;

  static LidarModel vlp16() { return {}; }
  static LidarModel hdl64() { return {64, -24.8, 2.0, 1800, 1.0, 80.0, 0.01}; }
};

enum class Course { Corridor, TMerge };

Course parse_course(const std::string& name);

struct Sequence {
  World world;
  /// World-from-sensor pose of every sweep.
  std::vector<RigidTransform> poses;
};

constexpr double kSensorHeight = 1.73;

/// Straight street lined with stepped building fronts and parked cars;
/// the sensor drives along +x.
World corridor_world(double length, std::uint64_t seed);
/// Side street meeting a perpendicular main road; the sensor drives along
/// +x, turns left through a quarter circle and continues along +y.
World t_merge_world(double main_road_length, std::uint64_t seed);

/// Sensor poses every `speed` metres of arc length along the course.
std::vector<RigidTransform> course_poses(Course course, int sweeps, double speed);

Sequence make_sequence(Course course, int sweeps, double speed, std::uint64_t seed);

/// Casts every beam from `sensor_pose` and returns hits in the sensor frame
/// (x forward, y left, z up). Noise is drawn per ray from (seed, ray), so
/// serial and parallel runs agree bit for bit.
PointCloud raycast(const World& world, const RigidTransform& sensor_pose, const LidarModel& model,
                   std::uint64_t seed, Exec exec = Exec::Parallel);

/// Pose list relative to the first entry (the first becomes identity).
std::vector<RigidTransform> relative_to_first(const std::vector<RigidTransform>& poses);

}  // namespace pocodom::synth
