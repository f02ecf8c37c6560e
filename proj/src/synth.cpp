#include "pocodom/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "pocodom/error.hpp"

namespace pocodom::synth {

namespace {

constexpr double kRoadHalfWidth = 7.0;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double unit_uniform(std::uint64_t bits) { return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53; }

double gaussian(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t a = splitmix64(seed ^ splitmix64(index));
  const std::uint64_t b = splitmix64(a);
  return std::sqrt(-2.0 * std::log(unit_uniform(a))) * std::cos(2.0 * std::numbers::pi * unit_uniform(b));
}

// Buildings along an axis-aligned road edge. `axis` 0 runs the facade along
// x, 1 along y; `side` is +1/-1 for which way the buildings extend from the
// edge line at coordinate `edge`.
void add_facade(World& world, int axis, int side, double edge, double s_begin, double s_end, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> length(8.0, 18.0);
  std::uniform_real_distribution<double> height(6.0, 14.0);
  std::uniform_int_distribution<int> step(1, 2);
  std::uniform_real_distribution<double> alley(3.0, 6.0);
  std::bernoulli_distribution has_alley(0.3);
  int setback = 0;
  double s = s_begin;
  while (s < s_end) {
    const double s1 = std::min(s + length(rng), s_end);
    // Neighbouring fronts never line up, so every junction shows a step.
    setback = (setback + step(rng)) % 3;
    const double near = edge + side * (1.5 * setback);
    const double far = near + side * 8.0;
    Box b;
    const double lo_l = std::min(near, far), hi_l = std::max(near, far);
    if (axis == 0) {
      b.lo = {s, lo_l, world.ground_height};
      b.hi = {s1, hi_l, world.ground_height + height(rng)};
    } else {
      b.lo = {lo_l, s, world.ground_height};
      b.hi = {hi_l, s1, world.ground_height + height(rng)};
    }
    world.boxes.push_back(b);
    s = has_alley(rng) ? s1 + alley(rng) : s1;
  }
}

void add_cars(World& world, int axis, double lane, double s_begin, double s_end, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> gap(10.0, 25.0);
  for (double s = s_begin + gap(rng); s + 4.0 < s_end; s += 4.0 + gap(rng)) {
    Box b;
    if (axis == 0) {
      b.lo = {s, lane - 1.0, world.ground_height};
      b.hi = {s + 4.0, lane + 1.0, world.ground_height + 1.5};
    } else {
      b.lo = {lane - 1.0, s, world.ground_height};
      b.hi = {lane + 1.0, s + 4.0, world.ground_height + 1.5};
    }
    world.boxes.push_back(b);
  }
}

constexpr double kMergeX = 60.0;
constexpr double kTurnRadius = 10.0;

// (x, y, yaw) at arc length s.
Eigen::Vector3d course_point(Course course, double s) {
  if (course == Course::Corridor) return {s, 0.0, 0.0};
  const double straight = kMergeX - kTurnRadius;
  const double arc = kTurnRadius * std::numbers::pi / 2.0;
  if (s <= straight) return {s, 0.0, 0.0};
  if (s <= straight + arc) {
    const double a = (s - straight) / kTurnRadius;
    return {straight + kTurnRadius * std::sin(a), kTurnRadius * (1.0 - std::cos(a)), a};
  }
  return {kMergeX, kTurnRadius + (s - straight - arc), std::numbers::pi / 2.0};
}

bool ray_box(const Eigen::Vector3d& o, const Eigen::Vector3d& inv_d, const Box& b, double& t_hit) {
  double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    double ta = (b.lo[a] - o[a]) * inv_d[a];
    double tb = (b.hi[a] - o[a]) * inv_d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  t_hit = t0;
  return true;
}

}  // namespace

Course parse_course(const std::string& name) {
  if (name == "corridor") return Course::Corridor;
  if (name == "t-merge") return Course::TMerge;
  throw Error(ErrorCode::InvalidArgument, "unknown world '" + name + "' (corridor | t-merge)");
}

World corridor_world(double length, std::uint64_t seed) {
  World w;
  std::mt19937_64 rng(seed);
  add_facade(w, 0, +1, kRoadHalfWidth, -60.0, length + 100.0, rng);
  add_facade(w, 0, -1, -kRoadHalfWidth, -60.0, length + 100.0, rng);
  add_cars(w, 0, 5.0, -40.0, length + 80.0, rng);
  add_cars(w, 0, -5.0, -40.0, length + 80.0, rng);
  return w;
}

World t_merge_world(double main_road_length, std::uint64_t seed) {
  World w;
  std::mt19937_64 rng(seed);
  const double near_edge = kMergeX - kRoadHalfWidth;
  const double far_edge = kMergeX + kRoadHalfWidth;
  const double y_end = main_road_length + 80.0;
  add_facade(w, 0, +1, kRoadHalfWidth, -60.0, near_edge, rng);
  add_facade(w, 0, -1, -kRoadHalfWidth, -60.0, near_edge, rng);
  add_facade(w, 1, -1, near_edge, kRoadHalfWidth + 8.0, y_end, rng);
  add_facade(w, 1, -1, near_edge, -80.0, -kRoadHalfWidth - 8.0, rng);
  add_facade(w, 1, +1, far_edge, -80.0, y_end, rng);
  add_cars(w, 0, -5.0, -40.0, near_edge - 6.0, rng);
  add_cars(w, 1, far_edge - 2.0, -60.0, y_end, rng);
  return w;
}

std::vector<RigidTransform> course_poses(Course course, int sweeps, double speed) {
  if (sweeps < 1 || !(speed >= 0.0)) throw Error(ErrorCode::InvalidArgument, "need sweeps >= 1 and speed >= 0");
  std::vector<RigidTransform> poses;
  poses.reserve(static_cast<std::size_t>(sweeps));
  for (int k = 0; k < sweeps; ++k) {
    const Eigen::Vector3d c = course_point(course, speed * k);
    const Eigen::Matrix3d r = Eigen::AngleAxisd(c[2], Eigen::Vector3d::UnitZ()).toRotationMatrix();
    poses.emplace_back(r, Eigen::Vector3d(c[0], c[1], kSensorHeight));
  }
  return poses;
}

Sequence make_sequence(Course course, int sweeps, double speed, std::uint64_t seed) {
  Sequence seq;
  const double length = speed * std::max(sweeps - 1, 0);
  seq.world = course == Course::Corridor ? corridor_world(length, seed) : t_merge_world(length, seed);
  seq.poses = course_poses(course, sweeps, speed);
  return seq;
}

PointCloud raycast(const World& world, const RigidTransform& sensor_pose, const LidarModel& model,
                   std::uint64_t seed, Exec exec) {
  const std::size_t rays = static_cast<std::size_t>(model.beams) * static_cast<std::size_t>(model.azimuth_steps);
  std::vector<Point3> hits(rays);
  std::vector<char> valid(rays, 0);
  const Eigen::Vector3d origin = sensor_pose.translation();
  const Eigen::Matrix3d& rot = sensor_pose.rotation();
  const double deg = std::numbers::pi / 180.0;

  for_each_index(exec, rays, [&](std::size_t ray) {
    const int beam = static_cast<int>(ray / static_cast<std::size_t>(model.azimuth_steps));
    const int step = static_cast<int>(ray % static_cast<std::size_t>(model.azimuth_steps));
    const double elev =
        model.beams > 1 ? (model.min_elevation_deg +
                           (model.max_elevation_deg - model.min_elevation_deg) * beam / (model.beams - 1)) *
                              deg
                        : model.min_elevation_deg * deg;
    const double az = 2.0 * std::numbers::pi * step / model.azimuth_steps;
    const Eigen::Vector3d local(std::cos(elev) * std::cos(az), std::cos(elev) * std::sin(az), std::sin(elev));
    const Eigen::Vector3d dir = rot * local;
    const Eigen::Vector3d inv(1.0 / dir.x(), 1.0 / dir.y(), 1.0 / dir.z());

    double best = model.max_range;
    bool hit = false;
    if (dir.z() < 0.0) {
      const double t = (world.ground_height - origin.z()) / dir.z();
      if (t < best) {
        best = t;
        hit = true;
      }
    }
    for (const Box& b : world.boxes) {
      double t = 0.0;
      if (ray_box(origin, inv, b, t) && t < best && t > 0.0) {
        best = t;
        hit = true;
      }
    }
    if (!hit || best < model.min_range) return;
    const double range = best + model.range_noise * gaussian(seed, ray);
    hits[ray] = local * range;
    valid[ray] = 1;
  });

  PointCloud cloud;
  cloud.points.reserve(rays);
  for (std::size_t i = 0; i < rays; ++i) {
    if (valid[i]) cloud.points.push_back(hits[i]);
  }
  return cloud;
}

std::vector<RigidTransform> relative_to_first(const std::vector<RigidTransform>& poses) {
  std::vector<RigidTransform> out;
  if (poses.empty()) return out;
  const RigidTransform inv0 = poses.front().inverse();
  out.reserve(poses.size());
  for (const RigidTransform& p : poses) out.push_back(inv0 * p);
  return out;
}

}  // namespace pocodom::synth
