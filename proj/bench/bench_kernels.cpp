#include <benchmark/benchmark.h>

#include "pocodom/ground_plane.hpp"
#include "pocodom/icp.hpp"
#include "pocodom/object_removal.hpp"
#include "pocodom/synth.hpp"

using namespace pocodom;

namespace {

Exec mode(const benchmark::State& state) { return state.range(0) == 0 ? Exec::Serial : Exec::Parallel; }

struct Scene {
  synth::Sequence seq = synth::make_sequence(synth::Course::Corridor, 2, 1.0, 7);
  PointCloud scan = synth::raycast(seq.world, seq.poses[0], synth::LidarModel::hdl64(), 1);
  PointCloud next = synth::raycast(seq.world, seq.poses[1], synth::LidarModel::hdl64(), 2);
};

const Scene& scene() {
  static const Scene s;
  return s;
}

void BM_Raycast(benchmark::State& state) {
  const Scene& s = scene();
  for (auto _ : state) {
    benchmark::DoNotOptimize(synth::raycast(s.seq.world, s.seq.poses[0], synth::LidarModel::hdl64(), 1, mode(state)));
  }
}

void BM_Ransac(benchmark::State& state) {
  const Scene& s = scene();
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_ground_detailed(s.scan, {}, FrameConvention::kitti(), 3, mode(state)));
  }
}

void BM_DbscanCoreFlags(benchmark::State& state) {
  const Scene& s = scene();
  const Plane ground = estimate_ground(s.scan, {}, FrameConvention::kitti(), 3);
  const std::vector<Point3> pts = split_ground(s.scan, ground, 0.2).non_ground.points;
  for (auto _ : state) benchmark::DoNotOptimize(dbscan_core_flags(pts, 0.5, 5, mode(state)));
  state.counters["points"] = static_cast<double>(pts.size());
}

void BM_Normals(benchmark::State& state) {
  const Scene& s = scene();
  for (auto _ : state) benchmark::DoNotOptimize(estimate_normals(s.scan, 20, Point3::Zero(), mode(state)));
}

void BM_Linearize(benchmark::State& state) {
  const Scene& s = scene();
  const IcpTarget target(estimate_normals(s.scan, 20, Point3::Zero()));
  const RigidTransform guess = RigidTransform::translation({1.0, 0.0, 0.0});
  for (auto _ : state) benchmark::DoNotOptimize(linearize(s.next.points, target, guess, {}, mode(state)));
}

}  // namespace

// Argument 0 = serial reference, 1 = OpenMP.
BENCHMARK(BM_Raycast)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ransac)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DbscanCoreFlags)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Normals)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Linearize)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
