#include <CLI11.hpp>

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pocodom/config.hpp"
#include "pocodom/dataset_io.hpp"
#include "pocodom/error.hpp"
#include "pocodom/evaluation.hpp"
#include "pocodom/pipeline.hpp"
#include "pocodom/poc_matcher.hpp"
#include "pocodom/synth.hpp"

namespace fs = std::filesystem;
using namespace pocodom;

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;
constexpr int kExitLostTracking = 3;

PipelineConfig config_from(const std::string& path) { return path.empty() ? PipelineConfig{} : load_config(path); }

std::string format_matrix(const RigidTransform& t) {
  const Eigen::Matrix3d& r = t.rotation();
  const Eigen::Vector3d& p = t.translation();
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g %.9g %.9g %.9g %.9g %.9g %.9g %.9g %.9g %.9g", r(0, 0), r(0, 1),
                r(0, 2), p.x(), r(1, 0), r(1, 1), r(1, 2), p.y(), r(2, 0), r(2, 1), r(2, 2), p.z());
  return buf;
}

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
}

// ---- run -------------------------------------------------------------------

struct RunOptions {
  std::string data;
  std::string config;
  std::optional<int> skip;
  std::optional<std::uint64_t> seed;
  bool no_object_removal = false;
  std::string out_traj = "trajectory.txt";
  std::string out_map;
  std::string report;
  std::string traj_format = "kitti-12";
  std::string map_format = "pcd";
};

int cmd_run(const RunOptions& opt) {
  if (opt.data.empty()) {
    std::fprintf(stderr, "run: no data directory (pass --data or set POCODOM_DATA_ROOT)\n");
    return kExitUsage;
  }
  PipelineConfig cfg = config_from(opt.config);
  if (opt.skip) cfg.frame_skip = *opt.skip;
  if (opt.seed) cfg.rng_seed = *opt.seed;
  if (opt.no_object_removal) cfg.enable_object_removal = false;
  cfg.validate();
  const TrajectoryFormat traj_format = parse_trajectory_format(opt.traj_format);
  const MapFormat map_format = parse_map_format(opt.map_format);

  const SweepSource source = SweepSource::open(opt.data);
  std::fprintf(stderr, "run: %zu scans in %s, skip %d\n", source.size(), opt.data.c_str(), cfg.frame_skip);

  const RunResult result = run_sequence(
      source.size(),
      [&](std::size_t i) {
        std::size_t dropped = 0;
        PointCloud cloud = source.load(i, &dropped);
        if (dropped > 0) std::fprintf(stderr, "sweep %zu: dropped %zu non-finite points\n", i, dropped);
        return cloud;
      },
      cfg,
      [&](const SweepReport& r) {
        const Eigen::Vector3d& t = r.pose.translation();
        std::fprintf(stderr, "sweep %zu/%zu  t=(%.3f, %.3f, %.3f)  %.0f ms%s%s\n", r.sweep_index + 1, source.size(),
                     t.x(), t.y(), t.z(), r.cycle_ms, r.degraded ? "  degraded" : "",
                     r.skipped ? "  skipped" : "");
      });

  if (result.trajectory.empty()) throw Error(ErrorCode::EmptyResult, "no sweep of " + opt.data + " was processed");
  ensure_parent(opt.out_traj);
  write_trajectory(result.trajectory, opt.out_traj, traj_format);
  std::fprintf(stderr, "wrote %zu poses to %s\n", result.trajectory.size(), opt.out_traj.c_str());
  if (!opt.out_map.empty()) {
    ensure_parent(opt.out_map);
    write_map(result.map.points(), opt.out_map, map_format);
    std::fprintf(stderr, "wrote %zu map points to %s\n", result.map.size(), opt.out_map.c_str());
  }
  if (!opt.report.empty()) {
    ensure_parent(opt.report);
    write_text_file(opt.report, format_run_report(result.reports, format_config(cfg)));
  }
  return 0;
}

// ---- eval ------------------------------------------------------------------

struct EvalOptions {
  std::string traj;
  std::string truth;
  std::string segments = "100..800";
  std::string report;
  int skip = 1;
  std::string calib;
  std::string out;
};

int cmd_eval(const EvalOptions& opt) {
  const std::vector<RigidTransform> poses = read_kitti_poses(opt.traj);
  std::vector<RigidTransform> truth = read_kitti_poses(opt.truth);
  if (!opt.calib.empty()) truth = camera_poses_to_lidar(truth, read_velo_to_cam(opt.calib));

  // Trajectory rows carry no sweep index; take it from the run report when
  // given (skipped sweeps have no row), otherwise from the skip factor.
  std::vector<SweepReport> rows;
  std::vector<std::size_t> indices;
  if (!opt.report.empty()) {
    rows = parse_run_report(read_text_file(opt.report));
    for (const SweepReport& r : rows) {
      if (!r.skipped) indices.push_back(r.sweep_index);
    }
    if (indices.size() != poses.size()) {
      throw Error(ErrorCode::MalformedFile, opt.report + " lists " + std::to_string(indices.size()) +
                                                " processed sweeps but " + opt.traj + " holds " +
                                                std::to_string(poses.size()) + " poses");
    }
  } else {
    if (opt.skip < 1) throw Error(ErrorCode::InvalidArgument, "--skip must be >= 1");
    for (std::size_t i = 0; i < poses.size(); ++i) indices.push_back(i * static_cast<std::size_t>(opt.skip));
  }
  Trajectory traj;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    if (indices[i] >= truth.size()) {
      throw Error(ErrorCode::MalformedFile, "sweep " + std::to_string(indices[i]) + " has no ground-truth pose");
    }
    traj.append(indices[i], poses[i]);
  }

  DriftReport report = evaluate(traj, truth, parse_segment_lengths(opt.segments));
  if (!rows.empty()) attach_run_report(report, rows);
  std::fputs(format_drift_summary(report).c_str(), stdout);
  if (!opt.out.empty()) {
    ensure_parent(opt.out);
    write_text_file(opt.out, format_drift_csv(report));
  }
  if (report.lost_tracking) {
    std::fprintf(stderr, "eval: lost tracking (a segment error exceeds %.0f%%)\n", kLostTrackingPercent);
    return kExitLostTracking;
  }
  return 0;
}

// ---- register-pair ---------------------------------------------------------

struct PairOptions {
  std::string a;
  std::string b;
  std::string dump_dir;
  std::string config;
};

int cmd_register_pair(const PairOptions& opt) {
  PipelineConfig cfg = config_from(opt.config);
  cfg.frame_skip = 1;
  PointCloud a = read_kitti_scan(opt.a);
  PointCloud b = read_kitti_scan(opt.b);
  a.sweep_index = 0;
  b.sweep_index = 1;

  Pipeline pipeline(cfg);
  pipeline.process_sweep(a);
  const SweepReport r = pipeline.process_sweep(b);

  char head[512];
  std::snprintf(head, sizeof(head),
                "# both transforms map points of b into the frame of a (rows of [R|t])\n"
                "coarse_theta_rad %.9g\ncoarse_confidence %.6g\ncoarse_fallback %d\n"
                "icp_rmse %.6g\nicp_iterations %d\nicp_correspondences %zu\nicp_fallback %d\n",
                r.coarse_theta, r.coarse_confidence, r.coarse_fallback, r.icp_rmse, r.icp_iterations,
                r.icp_correspondences, r.icp_fallback);
  std::string text = head;
  text += "T_coarse " + format_matrix(r.coarse_init) + "\n";
  text += "T_icp " + format_matrix(r.relative) + "\n";
  std::fputs(text.c_str(), stdout);

  if (opt.dump_dir.empty()) return 0;
  const fs::path dir = opt.dump_dir;
  fs::create_directories(dir);
  write_text_file(dir / "transforms.txt", text);

  const PreparedSweep pa = prepare_sweep(a, cfg);
  const PreparedSweep pb = prepare_sweep(b, cfg);
  if (!pa.grid || !pb.grid) throw Error(ErrorCode::EmptyGrid, "a scan left nothing to rasterize");
  const Image fa = to_probability(*pa.grid);
  const Image fb = to_probability(*pb.grid);
  write_pgm((dir / "grid_a.pgm").string(), fa, 0.0, 1.0);
  write_pgm((dir / "grid_b.pgm").string(), fb, 0.0, 1.0);
  const Image wa = window(fa), wb = window(fb);
  const Image polar_a = polar_map(amplitude_spectrum(wa), cfg.poc.r_min);
  const Image polar_b = polar_map(amplitude_spectrum(wb), cfg.poc.r_min);
  write_pgm_autoscale((dir / "polar_a.pgm").string(), Image(polar_a.log1p()));
  write_pgm_autoscale((dir / "polar_b.pgm").string(), Image(polar_b.log1p()));
  write_pgm_autoscale((dir / "poc_rotation.pgm").string(), fftshift(correlation_surface(polar_a, polar_b, cfg.poc)));
  const Image derotated = window(rotate_image(fb, -r.coarse_theta));
  write_pgm_autoscale((dir / "poc_translation.pgm").string(), fftshift(correlation_surface(wa, derotated, cfg.poc)));
  std::fprintf(stderr, "wrote grids, polar maps and correlation surfaces to %s\n", dir.c_str());
  return 0;
}

// ---- rasterize -------------------------------------------------------------

int cmd_rasterize(const std::string& scan, const std::string& out, const std::string& config) {
  const PipelineConfig cfg = config_from(config);
  PointCloud cloud = read_kitti_scan(scan);
  const PreparedSweep prep = prepare_sweep(cloud, cfg);
  if (!prep.grid) throw Error(ErrorCode::EmptyGrid, scan + " left nothing to rasterize");
  ensure_parent(out);
  write_pgm(out, to_probability(*prep.grid), 0.0, 1.0);
  std::fprintf(stderr, "wrote %dx%d grid (%zu of %zu points kept) to %s\n", cfg.grid.n, cfg.grid.n,
               prep.filtered.size(), cloud.size(), out.c_str());
  return 0;
}

// ---- synth -----------------------------------------------------------------

struct SynthOptions {
  std::string world = "corridor";
  int sweeps = 100;
  double speed = 1.2;
  std::string out;
  std::string sensor = "hdl64";
  std::uint64_t seed = 7;
};

int cmd_synth(const SynthOptions& opt) {
  const synth::Course course = synth::parse_course(opt.world);
  synth::LidarModel model;
  if (opt.sensor == "hdl64") {
    model = synth::LidarModel::hdl64();
  } else if (opt.sensor == "vlp16") {
    model = synth::LidarModel::vlp16();
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown sensor '" + opt.sensor + "' (hdl64 | vlp16)");
  }
  const synth::Sequence seq = synth::make_sequence(course, opt.sweeps, opt.speed, opt.seed);
  const fs::path scans = fs::path(opt.out) / "velodyne";
  fs::create_directories(scans);
  for (int i = 0; i < opt.sweeps; ++i) {
    const PointCloud cloud =
        synth::raycast(seq.world, seq.poses[static_cast<std::size_t>(i)], model, opt.seed * 1000003ULL + i);
    char name[32];
    std::snprintf(name, sizeof(name), "%06d.bin", i);
    write_kitti_scan(scans / name, cloud);
    std::fprintf(stderr, "sweep %d/%d  %zu points\n", i + 1, opt.sweeps, cloud.size());
  }
  Trajectory truth;
  const std::vector<RigidTransform> rel = synth::relative_to_first(seq.poses);
  for (std::size_t i = 0; i < rel.size(); ++i) truth.append(i, rel[i]);
  write_trajectory(truth, fs::path(opt.out) / "poses.txt", TrajectoryFormat::Kitti12);
  std::fprintf(stderr, "wrote %d sweeps and poses.txt to %s\n", opt.sweeps, opt.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LiDAR odometry from phase-only correlation and point-to-plane ICP"};
  app.require_subcommand(1, 1);

  RunOptions run;
  if (const char* root = std::getenv("POCODOM_DATA_ROOT")) run.data = root;
  auto* run_cmd = app.add_subcommand("run", "Estimate a trajectory and map from a scan directory");
  run_cmd->add_option("--data", run.data, "Sequence directory (default: $POCODOM_DATA_ROOT)");
  run_cmd->add_option("--config", run.config, "INI config file");
  run_cmd->add_option("--skip", run.skip, "Process every s-th sweep")->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", run.seed, "RANSAC seed");
  run_cmd->add_flag("--no-object-removal", run.no_object_removal, "Keep small objects");
  run_cmd->add_option("--out-traj", run.out_traj, "Trajectory output")->capture_default_str();
  run_cmd->add_option("--out-map", run.out_map, "Map point cloud output");
  run_cmd->add_option("--report", run.report, "Per-sweep CSV report with the effective config");
  run_cmd->add_option("--traj-format", run.traj_format, "kitti-12 | tum-8")->capture_default_str();
  run_cmd->add_option("--map-format", run.map_format, "pcd | xyz")->capture_default_str();

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Segment drift of a trajectory against ground truth");
  eval_cmd->add_option("--traj", eval.traj, "Estimated trajectory (kitti-12)")->required();
  eval_cmd->add_option("--truth", eval.truth, "Ground-truth poses (kitti-12)")->required();
  eval_cmd->add_option("--segments", eval.segments, "Segment lengths: a..b in steps of 100, or a list")
      ->capture_default_str();
  eval_cmd->add_option("--report", eval.report, "Run report (sweep indices and timing)");
  eval_cmd->add_option("--skip", eval.skip, "Skip factor when no report is given")->capture_default_str();
  eval_cmd->add_option("--calib", eval.calib, "KITTI calib file; truth is converted to the lidar frame");
  eval_cmd->add_option("--out", eval.out, "Per-segment CSV output");

  PairOptions pair;
  auto* pair_cmd = app.add_subcommand("register-pair", "Register scan b against scan a");
  pair_cmd->add_option("--a", pair.a, "Reference scan")->required();
  pair_cmd->add_option("--b", pair.b, "Moving scan")->required();
  pair_cmd->add_option("--dump-dir", pair.dump_dir, "Directory for grids, spectra and correlation dumps");
  pair_cmd->add_option("--config", pair.config, "INI config file");

  std::string raster_scan, raster_out, raster_config;
  auto* raster_cmd = app.add_subcommand("rasterize", "Write the occupancy grid of one scan as PGM");
  raster_cmd->add_option("--scan", raster_scan, "Scan file")->required();
  raster_cmd->add_option("--out", raster_out, "Output PGM")->required();
  raster_cmd->add_option("--config", raster_config, "INI config file");

  SynthOptions syn;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic sequence with ground truth");
  synth_cmd->add_option("--world", syn.world, "corridor | t-merge")->capture_default_str();
  synth_cmd->add_option("--sweeps", syn.sweeps, "Number of sweeps")->check(CLI::PositiveNumber)->capture_default_str();
  synth_cmd->add_option("--speed", syn.speed, "Metres travelled per sweep")->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  synth_cmd->add_option("--out", syn.out, "Output directory")->required();
  synth_cmd->add_option("--sensor", syn.sensor, "hdl64 | vlp16")->capture_default_str();
  synth_cmd->add_option("--seed", syn.seed, "World and noise seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*eval_cmd) return cmd_eval(eval);
    if (*pair_cmd) return cmd_register_pair(pair);
    if (*raster_cmd) return cmd_rasterize(raster_scan, raster_out, raster_config);
    if (*synth_cmd) return cmd_synth(syn);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}
