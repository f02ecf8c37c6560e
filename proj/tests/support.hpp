#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "pocodom/geometry.hpp"
#include "pocodom/fft.hpp"
#include "pocodom/image.hpp"

namespace testing {

using pocodom::Point3;
using pocodom::PointCloud;
using pocodom::RigidTransform;

inline double deg(double d) { return d * std::numbers::pi / 180.0; }

inline Eigen::Matrix3d rot_z_by_hand(double a) {
  Eigen::Matrix3d r;
  r << std::cos(a), -std::sin(a), 0.0, std::sin(a), std::cos(a), 0.0, 0.0, 0.0, 1.0;
  return r;
}

inline RigidTransform random_transform(std::mt19937_64& rng, double max_angle = std::numbers::pi,
                                       double max_translation = 10.0) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::Vector3d axis(n(rng), n(rng), n(rng));
  axis.normalize();
  const double angle = max_angle * u(rng);
  const Eigen::Vector3d t(max_translation * u(rng), max_translation * u(rng), max_translation * u(rng));
  return {Eigen::AngleAxisd(angle, axis).toRotationMatrix(), t};
}

inline std::vector<Point3> random_points(std::mt19937_64& rng, std::size_t count, double half_extent) {
  std::uniform_real_distribution<double> u(-half_extent, half_extent);
  std::vector<Point3> out(count);
  for (Point3& p : out) p = {u(rng), u(rng), u(rng)};
  return out;
}

inline PointCloud cloud_of(std::vector<Point3> pts) {
  PointCloud c;
  c.points = std::move(pts);
  return c;
}

/// Points on a regular lattice over an axis-aligned rectangle in one of the
/// coordinate planes. `fixed_axis` is held at `fixed_value`.
inline void add_lattice(std::vector<Point3>& out, int fixed_axis, double fixed_value, double a_lo, double a_hi,
                        double b_lo, double b_hi, double step) {
  const int a_axis = (fixed_axis + 1) % 3;
  const int b_axis = (fixed_axis + 2) % 3;
  for (double a = a_lo; a <= a_hi + 1e-9; a += step) {
    for (double b = b_lo; b <= b_hi + 1e-9; b += step) {
      Point3 p;
      p[fixed_axis] = fixed_value;
      p[a_axis] = a;
      p[b_axis] = b;
      out.push_back(p);
    }
  }
}

/// Ground plane plus two perpendicular walls and a third wall facing the
/// sensor: every rigid motion is observable.
inline std::vector<Point3> structured_scene(double step = 0.25) {
  std::vector<Point3> pts;
  add_lattice(pts, 2, -1.5, -8.0, 8.0, -8.0, 8.0, step * 2.0);  // ground z = -1.5
  add_lattice(pts, 1, 6.0, -1.5, 3.0, -8.0, 8.0, step);          // wall y = 6 (z, x)
  add_lattice(pts, 0, 7.0, -6.0, 6.0, -1.5, 3.0, step);          // wall x = 7 (y, z)
  add_lattice(pts, 1, -5.0, -1.5, 2.0, -3.0, 4.0, step);         // wall y = -5
  return pts;
}

/// Surface samples of an axis-aligned box.
inline void add_box_surface(std::vector<Point3>& out, const Eigen::Vector3d& lo, const Eigen::Vector3d& hi,
                            double step) {
  for (int axis = 0; axis < 3; ++axis) {
    const int a = (axis + 1) % 3, b = (axis + 2) % 3;
    for (double fixed : {lo[axis], hi[axis]}) {
      for (double u = lo[a]; u <= hi[a] + 1e-9; u += step) {
        for (double v = lo[b]; v <= hi[b] + 1e-9; v += step) {
          Point3 p;
          p[axis] = fixed;
          p[a] = u;
          p[b] = v;
          out.push_back(p);
        }
      }
    }
  }
}

constexpr double kGroundHeight = 1.73;

/// Points on z = -kGroundHeight with optional Gaussian height noise.
inline std::vector<Point3> plane_points(std::mt19937_64& rng, std::size_t count, double sigma) {
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  std::normal_distribution<double> noise(0.0, sigma > 0 ? sigma : 1.0);
  std::vector<Point3> pts(count);
  for (Point3& p : pts) p = {u(rng), u(rng), -kGroundHeight + (sigma > 0 ? noise(rng) : 0.0)};
  return pts;
}

/// Plane samples (sigma 0.02) plus `fraction` outliers scattered above the
/// plane, inside the candidate band and higher.
inline PointCloud noisy_ground(std::uint64_t seed, double fraction) {
  std::mt19937_64 rng(seed);
  std::vector<Point3> pts = plane_points(rng, 4000, 0.02);
  const auto outliers = static_cast<std::size_t>(fraction / (1.0 - fraction) * 4000.0);
  std::uniform_real_distribution<double> u(-20.0, 20.0), h(-kGroundHeight + 0.05, 3.0);
  for (std::size_t i = 0; i < outliers; ++i) pts.push_back({u(rng), u(rng), h(rng)});
  return cloud_of(pts);
}

/// Up to 200 points mixing tight clumps and sparse scatter, so every DBSCAN
/// case (core, border, noise, several clusters) shows up.
inline std::vector<Point3> clumpy_cloud(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> total(1, 200);
  std::uniform_int_distribution<int> clumps(0, 6);
  std::uniform_real_distribution<double> where(-5.0, 5.0);
  std::normal_distribution<double> spread(0.0, 0.35);
  const int n = total(rng);
  const int k = clumps(rng);
  std::vector<Point3> centres;
  for (int c = 0; c < k; ++c) centres.push_back({where(rng), where(rng), where(rng) * 0.3});
  std::vector<Point3> pts;
  std::uniform_int_distribution<int> pick(0, std::max(0, k - 1));
  std::bernoulli_distribution scatter(0.25);
  for (int i = 0; i < n; ++i) {
    if (k == 0 || scatter(rng)) {
      pts.push_back({where(rng), where(rng), where(rng)});
    } else {
      const Point3& c = centres[static_cast<std::size_t>(pick(rng))];
      pts.push_back(c + Point3(spread(rng), spread(rng), spread(rng)));
    }
  }
  return pts;
}

// ---- oracles -----------------------------------------------------------------

/// k nearest by exhaustive scan, ties broken by index.
inline std::vector<std::pair<double, std::size_t>> brute_knn(const std::vector<Point3>& pts, const Point3& q,
                                                             std::size_t k) {
  std::vector<std::pair<double, std::size_t>> all;
  all.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) all.emplace_back((pts[i] - q).squaredNorm(), i);
  std::sort(all.begin(), all.end());
  if (all.size() > k) all.resize(k);
  return all;
}

struct BruteDbscan {
  std::vector<int> labels;
  std::vector<bool> core;
  int clusters = 0;
};

/// O(n^2) neighbour matrix, connected components of the core graph numbered
/// by their smallest core index, border points given the smallest adjacent
/// cluster id.
inline BruteDbscan brute_dbscan(const std::vector<Point3>& pts, double eps, int min_pts) {
  const std::size_t n = pts.size();
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  BruteDbscan out;
  out.core.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    int count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      adj[i][j] = (pts[i] - pts[j]).squaredNorm() <= eps * eps;
      count += adj[i][j] ? 1 : 0;
    }
    out.core[i] = count >= min_pts;
  }
  out.labels.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (!out.core[i] || out.labels[i] != -1) continue;
    const int id = out.clusters++;
    std::vector<std::size_t> stack{i};
    out.labels[i] = id;
    while (!stack.empty()) {
      const std::size_t q = stack.back();
      stack.pop_back();
      for (std::size_t j = 0; j < n; ++j) {
        if (adj[q][j] && out.core[j] && out.labels[j] == -1) {
          out.labels[j] = id;
          stack.push_back(j);
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (out.core[i]) continue;
    int best = -1;
    for (std::size_t j = 0; j < n; ++j) {
      if (adj[i][j] && out.core[j] && (best == -1 || out.labels[j] < best)) best = out.labels[j];
    }
    out.labels[i] = best;
  }
  return out;
}

/// Direct O(N^4) 2D DFT.
inline pocodom::ComplexImage naive_dft(const pocodom::Image& in) {
  const auto rows = in.rows(), cols = in.cols();
  pocodom::ComplexImage out(rows, cols);
  for (Eigen::Index u = 0; u < rows; ++u) {
    for (Eigen::Index v = 0; v < cols; ++v) {
      std::complex<double> acc = 0.0;
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
          const double phase = -2.0 * std::numbers::pi *
                               (static_cast<double>(u * r) / rows + static_cast<double>(v * c) / cols);
          acc += in(r, c) * std::polar(1.0, phase);
        }
      }
      out(u, v) = acc;
    }
  }
  return out;
}

inline std::vector<double> hann_1d(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
  return w;
}

/// Smooth random field made of a handful of Gaussian blobs and bars; rich
/// enough in structure for phase correlation.
inline pocodom::Image structured_image(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.25 * n, 0.75 * n);
  std::uniform_real_distribution<double> size(1.5, 6.0);
  pocodom::Image img = pocodom::Image::Zero(n, n);
  for (int k = 0; k < 40; ++k) {
    const double cr = pos(rng), cc = pos(rng), s = size(rng);
    const int r0 = std::max(0, static_cast<int>(cr - 4 * s)), r1 = std::min(n - 1, static_cast<int>(cr + 4 * s));
    const int c0 = std::max(0, static_cast<int>(cc - 4 * s)), c1 = std::min(n - 1, static_cast<int>(cc + 4 * s));
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        const double d2 = (r - cr) * (r - cr) + (c - cc) * (c - cc);
        img(r, c) += std::exp(-d2 / (2 * s * s));
      }
    }
  }
  // Thin bars resembling walls.
  for (int k = 0; k < 8; ++k) {
    const int r = static_cast<int>(pos(rng)), c = static_cast<int>(pos(rng));
    const int len = static_cast<int>(size(rng) * 8);
    const bool horizontal = k % 2 == 0;
    for (int i = 0; i < len; ++i) {
      const int rr = horizontal ? r : std::min(n - 1, r + i);
      const int cc = horizontal ? std::min(n - 1, c + i) : c;
      img(rr, cc) += 1.0;
    }
  }
  return img;
}

/// Band-limited circular translation by a real-valued offset: out(x) =
/// in(x - d), via the Fourier shift theorem.
inline pocodom::Image fourier_shift(const pocodom::Image& in, double dr, double dc) {
  const auto rows = in.rows(), cols = in.cols();
  pocodom::ComplexImage f = pocodom::fft2(in);
  for (Eigen::Index u = 0; u < rows; ++u) {
    const double fu = static_cast<double>(u < rows / 2 ? u : u - rows) / rows;
    for (Eigen::Index v = 0; v < cols; ++v) {
      const double fv = static_cast<double>(v < cols / 2 ? v : v - cols) / cols;
      f(u, v) *= std::polar(1.0, -2.0 * std::numbers::pi * (fu * dr + fv * dc));
    }
  }
  return pocodom::ifft2(f).real();
}

}  // namespace testing
