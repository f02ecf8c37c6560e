#include "pocodom/dataset_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <Eigen/Geometry>

#include "pocodom/error.hpp"

namespace pocodom {
namespace fs = std::filesystem;

namespace {

float load_le_float(const unsigned char* p) {
  std::uint32_t bits = std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
                       (std::uint32_t(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

void store_le_float(unsigned char* p, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) p[i] = static_cast<unsigned char>(bits >> (8 * i));
}

// Shortest text that reads back to the same double.
std::string fmt_double(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[40];
  for (int digits = 9; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

RigidTransform pose_from_fields(const double* f, std::size_t line_no) {
  Eigen::Matrix3d r;
  Eigen::Vector3d t;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) r(i, j) = f[4 * i + j];
    t(i) = f[4 * i + 3];
  }
  const double off = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (!(off < 1e-3) || !(r.determinant() > 0.0)) {
    throw Error(ErrorCode::MalformedPose, "pose line " + std::to_string(line_no) + " is not a rotation");
  }
  return RigidTransform(nearest_rotation(r), t);
}

}  // namespace

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

PointCloud read_kitti_scan(const fs::path& path, std::size_t* dropped_non_finite) {
  std::string bytes;
  try {
    bytes = read_text_file(path);
  } catch (const Error&) {
    throw Error(ErrorCode::MalformedFile, path.string() + ": unreadable scan");
  }
  if (bytes.size() % 16 != 0) {
    throw Error(ErrorCode::MalformedFile,
                path.string() + ": size " + std::to_string(bytes.size()) + " is not a multiple of 16");
  }
  PointCloud cloud;
  cloud.frame = FrameKind::Lidar;
  const std::size_t n = bytes.size() / 16;
  cloud.points.reserve(n);
  std::size_t dropped = 0;
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char* rec = data + 16 * i;
    const Point3 p(load_le_float(rec), load_le_float(rec + 4), load_le_float(rec + 8));
    if (p.allFinite()) {
      cloud.points.push_back(p);
    } else {
      ++dropped;
    }
  }
  if (dropped_non_finite) *dropped_non_finite = dropped;
  return cloud;
}

void write_kitti_scan(const fs::path& path, const PointCloud& cloud) {
  std::string bytes(cloud.size() * 16, '\0');
  auto* data = reinterpret_cast<unsigned char*>(bytes.data());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int k = 0; k < 3; ++k) store_le_float(data + 16 * i + 4 * k, static_cast<float>(cloud.points[i](k)));
    store_le_float(data + 16 * i + 12, 0.0f);
  }
  write_text_file(path, bytes);
}

std::vector<RigidTransform> parse_kitti_poses(const std::string& text) {
  std::vector<RigidTransform> poses;
  std::istringstream lines(text);
  std::size_t line_no = 0;
  for (std::string line; std::getline(lines, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    double f[12];
    int count = 0;
    for (double v; fields >> v;) {
      if (count == 12) {
        count = 13;
        break;
      }
      f[count++] = v;
    }
    if (count != 12 || !(fields.eof())) {
      throw Error(ErrorCode::MalformedPose, "pose line " + std::to_string(line_no) + " must hold 12 numbers");
    }
    poses.push_back(pose_from_fields(f, line_no));
  }
  return poses;
}

std::vector<RigidTransform> read_kitti_poses(const fs::path& path) { return parse_kitti_poses(read_text_file(path)); }

TrajectoryFormat parse_trajectory_format(const std::string& name) {
  if (name == "kitti-12" || name == "kitti") return TrajectoryFormat::Kitti12;
  if (name == "tum-8" || name == "tum") return TrajectoryFormat::Tum8;
  throw Error(ErrorCode::InvalidArgument, "unknown trajectory format '" + name + "'");
}

std::string format_trajectory(const Trajectory& trajectory, TrajectoryFormat format, double sweep_period) {
  std::string out;
  for (const TrajectoryEntry& e : trajectory.poses) {
    const Eigen::Matrix3d& r = e.pose.rotation();
    const Eigen::Vector3d& t = e.pose.translation();
    std::vector<double> row;
    if (format == TrajectoryFormat::Kitti12) {
      for (int i = 0; i < 3; ++i) row.insert(row.end(), {r(i, 0), r(i, 1), r(i, 2), t(i)});
    } else {
      const Eigen::Quaterniond q(r);
      row = {static_cast<double>(e.sweep_index) * sweep_period, t.x(), t.y(), t.z(), q.x(), q.y(), q.z(), q.w()};
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ' ';
      out += fmt_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

void write_trajectory(const Trajectory& trajectory, const fs::path& path, TrajectoryFormat format,
                      double sweep_period) {
  write_text_file(path, format_trajectory(trajectory, format, sweep_period));
}

MapFormat parse_map_format(const std::string& name) {
  if (name == "pcd-ascii" || name == "pcd") return MapFormat::PcdAscii;
  if (name == "xyz") return MapFormat::Xyz;
  throw Error(ErrorCode::InvalidArgument, "unknown map format '" + name + "'");
}

void write_map(const std::vector<Point3>& points, const fs::path& path, MapFormat format) {
  if (points.empty()) throw Error(ErrorCode::InvalidArgument, "refusing to write an empty map");
  std::string out;
  if (format == MapFormat::PcdAscii) {
    const std::string n = std::to_string(points.size());
    out = "# .PCD v0.7 - Point Cloud Data file format\nVERSION 0.7\nFIELDS x y z\nSIZE 8 8 8\nTYPE F F F\n"
          "COUNT 1 1 1\nWIDTH " + n + "\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\nPOINTS " + n + "\nDATA ascii\n";
  }
  for (const Point3& p : points) {
    out += fmt_double(p.x()) + ' ' + fmt_double(p.y()) + ' ' + fmt_double(p.z()) + '\n';
  }
  write_text_file(path, out);
}

RigidTransform read_velo_to_cam(const fs::path& calib_path) {
  std::istringstream lines(read_text_file(calib_path));
  for (std::string line; std::getline(lines, line);) {
    if (line.rfind("Tr:", 0) != 0 && line.rfind("Tr_velo_to_cam:", 0) != 0) continue;
    std::istringstream fields(line.substr(line.find(':') + 1));
    double f[12];
    int count = 0;
    while (count < 12 && fields >> f[count]) ++count;
    if (count != 12) throw Error(ErrorCode::MalformedFile, calib_path.string() + ": Tr needs 12 numbers");
    return pose_from_fields(f, 0);
  }
  throw Error(ErrorCode::MalformedFile, calib_path.string() + ": no Tr entry");
}

std::vector<RigidTransform> camera_poses_to_lidar(const std::vector<RigidTransform>& poses,
                                                  const RigidTransform& velo_to_cam) {
  std::vector<RigidTransform> out;
  out.reserve(poses.size());
  const RigidTransform inv = velo_to_cam.inverse();
  for (const RigidTransform& p : poses) out.push_back(inv * p * velo_to_cam);
  return out;
}

SweepSource SweepSource::open(const fs::path& root) {
  if (!fs::is_directory(root)) throw Error(ErrorCode::IoError, root.string() + " is not a directory");
  const fs::path scan_dir = fs::is_directory(root / "velodyne") ? root / "velodyne" : root;
  SweepSource src;
  for (const auto& entry : fs::directory_iterator(scan_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".bin") src.scans.push_back(entry.path());
  }
  const auto numeric = [](const fs::path& p) {
    const std::string stem = p.stem().string();
    return std::pair(stem.size(), stem);
  };
  std::sort(src.scans.begin(), src.scans.end(),
            [&](const fs::path& a, const fs::path& b) { return numeric(a) < numeric(b); });
  if (src.scans.empty()) throw Error(ErrorCode::IoError, "no .bin scans under " + root.string());
  if (fs::is_regular_file(root / "poses.txt")) src.poses = root / "poses.txt";
  if (fs::is_regular_file(root / "calib.txt")) src.calib = root / "calib.txt";
  return src;
}

PointCloud SweepSource::load(std::size_t index, std::size_t* dropped_non_finite) const {
  if (index >= scans.size()) throw Error(ErrorCode::InvalidArgument, "sweep index out of range");
  PointCloud cloud = read_kitti_scan(scans[index], dropped_non_finite);
  cloud.sweep_index = index;
  return cloud;
}

}  // namespace pocodom
