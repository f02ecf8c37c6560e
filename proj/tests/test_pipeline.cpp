#include <doctest.h>

#include <set>
#include <tuple>

#include "pocodom/dataset_io.hpp"
#include "pocodom/error.hpp"
#include "pocodom/pipeline.hpp"
#include "pocodom/synth.hpp"
#include "support.hpp"

using namespace pocodom;
using namespace testing;

namespace {

struct Sweeps {
  std::vector<PointCloud> clouds;
  std::vector<RigidTransform> truth;  // relative to the first sweep
};

Sweeps corridor(int count, double speed, const synth::LidarModel& model = synth::LidarModel::vlp16()) {
  const synth::Sequence seq = synth::make_sequence(synth::Course::Corridor, count, speed, 3);
  Sweeps out;
  for (int i = 0; i < count; ++i) {
    out.clouds.push_back(synth::raycast(seq.world, seq.poses[i], model, 500 + i));
    out.clouds.back().sweep_index = static_cast<std::size_t>(i);
  }
  out.truth = synth::relative_to_first(seq.poses);
  return out;
}

const PointCloud& parked_sweep() {
  static const PointCloud cloud = corridor(1, 0.5).clouds[0];
  return cloud;
}

std::set<std::tuple<long, long, long>> voxel_set(const std::vector<Point3>& pts, double v) {
  std::set<std::tuple<long, long, long>> keys;
  for (const Point3& p : pts) {
    keys.insert({static_cast<long>(std::floor(p.x() / v)), static_cast<long>(std::floor(p.y() / v)),
                 static_cast<long>(std::floor(p.z() / v))});
  }
  return keys;
}

PointCloud world_cloud(std::vector<Point3> pts) {
  PointCloud c = cloud_of(std::move(pts));
  c.frame = FrameKind::World;
  return c;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("first sweep anchors the world frame") {
    PipelineConfig config;
    config.map_voxel = 0.0;
    Pipeline p(config);
    const SweepReport r = p.process_sweep(parked_sweep());
    CHECK(r.pose.matrix() == Eigen::Matrix4d::Identity());
    REQUIRE(p.trajectory().size() == 1);
    CHECK(p.map().points() == parked_sweep().points);

    const RunResult single = run_sequence({parked_sweep()}, config);
    CHECK(single.trajectory.size() == 1);
    CHECK(single.map.points() == parked_sweep().points);
  }

  TEST_CASE("standing still") {
    const std::vector<PointCloud> same(4, parked_sweep());
    const RunResult r = run_sequence(same, PipelineConfig{});
    REQUIRE(r.trajectory.size() == 4);
    for (const TrajectoryEntry& e : r.trajectory.poses) {
      CHECK(e.pose.translation().norm() < 1e-3);
      CHECK(e.pose.rotation_angle() < deg(0.05));
    }
    for (const SweepReport& s : r.reports) CHECK_FALSE(s.degraded);
  }

  TEST_CASE("frame skipping keeps every s-th sweep") {
    std::vector<std::size_t> loaded;
    const RunResult r = run_sequence(
        100,
        [&](std::size_t i) {
          loaded.push_back(i);
          return parked_sweep();
        },
        [] {
          PipelineConfig c;
          c.frame_skip = 5;
          return c;
        }());
    CHECK(r.trajectory.size() == 20);
    CHECK(r.reports.size() == 20);
    REQUIRE(loaded.size() == 20);
    for (std::size_t k = 0; k < loaded.size(); ++k) {
      CHECK(loaded[k] == 5 * k);
      CHECK(r.trajectory.poses[k].sweep_index == 5 * k);
    }
  }

  TEST_CASE("a failing loader is reported, not fatal") {
    const RunResult r = run_sequence(
        3,
        [](std::size_t i) -> PointCloud {
          if (i == 1) throw Error(ErrorCode::MalformedFile, "truncated");
          return parked_sweep();
        },
        PipelineConfig{});
    CHECK(r.trajectory.size() == 2);
    REQUIRE(r.reports.size() == 3);
    CHECK(r.reports[1].skipped);
    CHECK(r.reports[1].note.find("truncated") != std::string::npos);
    CHECK_THROWS_AS(run_sequence(std::vector<PointCloud>{}, PipelineConfig{}), Error);
  }

  TEST_CASE("short drive: poses chain the relative motions") {
    const Sweeps s = corridor(6, 0.5, synth::LidarModel::hdl64());
    PipelineConfig config;
    Pipeline p(config);
    for (const PointCloud& c : s.clouds) p.process_sweep(c);
    REQUIRE(p.trajectory().size() == 6);
    REQUIRE(p.relatives().size() == 6);

    // Running product recomputed from the 4x4 matrices.
    Eigen::Matrix4d running = Eigen::Matrix4d::Identity();
    for (std::size_t k = 0; k < 6; ++k) {
      running = running * p.relatives()[k].matrix();
      CHECK((running - p.trajectory().poses[k].pose.matrix()).cwiseAbs().maxCoeff() < 1e-9);
      CHECK(p.trajectory().poses[k].pose.is_valid());
    }
    CHECK(p.relatives()[0].matrix() == Eigen::Matrix4d::Identity());

    // Against the synthetic truth.
    for (std::size_t k = 0; k < 6; ++k) {
      const RigidTransform err = s.truth[k].inverse() * p.trajectory().poses[k].pose;
      CHECK(err.translation().norm() < 0.05);
      CHECK(err.rotation_angle() < deg(0.3));
    }
  }

  TEST_CASE("identical runs give identical trajectories") {
    const Sweeps s = corridor(4, 0.8);
    const RunResult a = run_sequence(s.clouds, PipelineConfig{});
    const RunResult b = run_sequence(s.clouds, PipelineConfig{});
    CHECK(format_trajectory(a.trajectory, TrajectoryFormat::Kitti12) ==
          format_trajectory(b.trajectory, TrajectoryFormat::Kitti12));
    CHECK(a.map.points() == b.map.points());
  }

  TEST_CASE("map deduplication") {
    std::mt19937_64 rng(9);
    const std::vector<Point3> first = random_points(rng, 3000, 5.0);
    MapCloud map(0.4);
    map = map_insert(map, world_cloud(first));
    CHECK(map.size() == voxel_set(first, 0.4).size());
    const std::size_t once = map.size();
    map = map_insert(map, world_cloud(first));
    CHECK(map.size() == once);

    std::vector<Point3> second = random_points(rng, 2000, 5.0);
    for (Point3& q : second) q.x() += 20.0;
    map = map_insert(map, world_cloud(second));
    CHECK(map.size() == once + voxel_set(second, 0.4).size());

    std::vector<Point3> both = first;
    both.insert(both.end(), second.begin(), second.end());
    CHECK(voxel_set(map.points(), 0.4) == voxel_set(both, 0.4));
    // First insertion wins.
    for (std::size_t i = 0; i < 10; ++i) CHECK(map.points()[i] == first[i]);

    MapCloud raw(0.0);
    raw.insert(world_cloud(first));
    raw.insert(world_cloud(first));
    CHECK(raw.size() == 2 * first.size());

    CHECK_THROWS_AS(map_insert(MapCloud(0.2), cloud_of(first)), Error);
  }

  TEST_CASE("trajectory indices must increase") {
    Trajectory t;
    t.append(0, RigidTransform::identity());
    t.append(2, RigidTransform::identity());
    CHECK_THROWS_AS(t.append(2, RigidTransform::identity()), Error);
    CHECK_THROWS_AS(t.append(1, RigidTransform::identity()), Error);
  }

  TEST_CASE("run report") {
    const RunResult r = run_sequence(std::vector<PointCloud>(2, parked_sweep()), PipelineConfig{});
    const std::string text = format_run_report(r.reports, "[pipeline]\nframe_skip = 1\n");
    CHECK(text.rfind("# [pipeline]\n# frame_skip = 1\n" + run_report_header() + "\n", 0) == 0);
    std::size_t lines = 0;
    for (char c : text) lines += c == '\n' ? 1 : 0;
    CHECK(lines == 5);
    CHECK(r.reports[1].icp_correspondences > 0);
    CHECK(r.reports[1].cycle_ms > 0.0);
  }

  TEST_CASE("configuration checks") {
    PipelineConfig c;
    c.frame_skip = 0;
    CHECK_THROWS_AS(Pipeline{c}, Error);
    c = {};
    c.map_voxel = -1.0;
    CHECK_THROWS_AS(Pipeline{c}, Error);
    CHECK_THROWS_AS(Pipeline{PipelineConfig{}}.process_sweep(PointCloud{}), Error);
  }
}
