#include "pocodom/poc_matcher.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pocodom/error.hpp"
#include "pocodom/fft.hpp"

namespace pocodom {

namespace {

void require_square_same(const Image& a, const Image& b) {
  if (a.rows() != a.cols() || a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::InvalidArgument, "POC needs two square images of equal size");
  }
}

// Signed representative of a circular index in [-n/2, n/2).
double wrap_signed(double v, int n) {
  double w = std::fmod(v, static_cast<double>(n));
  if (w < 0) w += n;
  if (w >= n / 2.0) w -= n;
  return w;
}

double normalize_half_turn(double theta) {
  // (-pi/2, pi/2]
  const double pi = std::numbers::pi;
  while (theta <= -pi / 2) theta += pi;
  while (theta > pi / 2) theta -= pi;
  return theta;
}

double normalize_full_turn(double theta) {
  const double pi = std::numbers::pi;
  while (theta <= -pi) theta += 2 * pi;
  while (theta > pi) theta -= 2 * pi;
  return theta;
}

}  // namespace

Image hann_window(int n) {
  Eigen::ArrayXd w(n);
  for (int i = 0; i < n; ++i) {
    w[i] = n > 1 ? 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / (n - 1))) : 1.0;
  }
  Image out(n, n);
  for (int r = 0; r < n; ++r) out.row(r) = w[r] * w.transpose();
  return out;
}

Image window(const Image& img) {
  if (img.rows() != img.cols()) throw Error(ErrorCode::InvalidArgument, "window needs a square image");
  return img * hann_window(static_cast<int>(img.rows()));
}

Image amplitude_spectrum(const Image& img) { return fftshift(Image(fft2(img).abs())); }

Image correlation_surface(const Image& a, const Image& b, const PocParams& params) {
  require_square_same(a, b);
  const ComplexImage fa = fft2(a);
  const ComplexImage fb = fft2(b);
  ComplexImage cross = fa * fb.conjugate();
  const double floor_sq = params.magnitude_floor * params.magnitude_floor;
  std::complex<double>* c = cross.data();
  for (Eigen::Index i = 0; i < cross.size(); ++i) {
    const double mag_sq = std::norm(c[i]);
    c[i] = mag_sq < floor_sq || mag_sq == 0.0 ? std::complex<double>(0.0, 0.0) : c[i] * (1.0 / std::sqrt(mag_sq));
  }
  return ifft2(cross).real();
}

PocPeak cross_power_peak(const Image& a, const Image& b, const PocParams& params) {
  const Image r = correlation_surface(a, b, params);
  const int n = static_cast<int>(r.rows());

  Eigen::Index pr = 0, pc = 0;
  const double peak = r.maxCoeff(&pr, &pc);

  // Centre of gravity over the non-negative values in a (2k+1)^2 window,
  // indices taken circularly.
  const int k = params.cog_radius;
  double sw = 0.0, sr = 0.0, sc = 0.0;
  for (int dr = -k; dr <= k; ++dr) {
    for (int dc = -k; dc <= k; ++dc) {
      const auto rr = static_cast<Eigen::Index>(((pr + dr) % n + n) % n);
      const auto cc = static_cast<Eigen::Index>(((pc + dc) % n + n) % n);
      const double w = std::max(0.0, r(rr, cc));
      sw += w;
      sr += w * dr;
      sc += w * dc;
    }
  }
  double row = static_cast<double>(pr), col = static_cast<double>(pc);
  if (sw > 0.0) {
    row += sr / sw;
    col += sc / sw;
  }

  PocPeak out;
  // The surface peaks at -shift.
  out.shift = Eigen::Vector2d(wrap_signed(-row, n), wrap_signed(-col, n));
  out.integer_peak = Eigen::Vector2i(static_cast<int>(pr), static_cast<int>(pc));
  out.peak_value = std::clamp(peak, 0.0, 1.0);
  out.low_confidence = out.peak_value < params.low_confidence_threshold;
  return out;
}

Image polar_map(const Image& magnitude, double r_min) {
  if (magnitude.rows() != magnitude.cols()) throw Error(ErrorCode::InvalidArgument, "polar_map needs a square image");
  const int n = static_cast<int>(magnitude.rows());
  const double c = center_index(n);
  const double r_max = n / 2.0;
  Eigen::ArrayXd cos_a(n), sin_a(n);
  for (int j = 0; j < n; ++j) {
    const double a = std::numbers::pi * j / n;
    cos_a[j] = std::cos(a);
    sin_a[j] = std::sin(a);
  }
  Image out(n, n);
  for (int i = 0; i < n; ++i) {
    const double radius = r_min + (r_max - r_min) * i / n;
    for (int j = 0; j < n; ++j) {
      out(i, j) = sample_bilinear(magnitude, c + radius * cos_a[j], c + radius * sin_a[j]);
    }
  }
  return out;
}

Image rotate_image(const Image& img, double angle) {
  const auto rows = img.rows(), cols = img.cols();
  const double cr = center_index(static_cast<int>(rows));
  const double cc = center_index(static_cast<int>(cols));
  const double c = std::cos(angle), s = std::sin(angle);
  Image out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double dr = r - cr;
    for (Eigen::Index col = 0; col < cols; ++col) {
      const double dc = col - cc;
      out(r, col) = sample_bilinear(img, cr + c * dr + s * dc, cc - s * dr + c * dc);
    }
  }
  return out;
}

RotationEstimate estimate_rotation(const Image& f_windowed, const Image& g_windowed, const PocParams& params) {
  require_square_same(f_windowed, g_windowed);
  const int n = static_cast<int>(f_windowed.rows());
  Image fp = polar_map(amplitude_spectrum(f_windowed), params.r_min);
  Image gp = polar_map(amplitude_spectrum(g_windowed), params.r_min);
  if (params.log_magnitude) {
    // Without compression the few innermost radii dominate, and there the
    // square window's footprint, which does not rotate, pins small angles to 0.
    fp = fp.log1p();
    gp = gp.log1p();
  }
  RotationEstimate est;
  est.peak = cross_power_peak(fp, gp, params);
  est.theta = normalize_half_turn(std::numbers::pi * est.peak.shift[1] / n);
  return est;
}

RigidTransform coarse_to_rigid(double theta, const Eigen::Vector2d& shift_pixels, double resolution,
                               const FrameConvention& conv) {
  // g de-rotated by -theta equals f shifted by `shift`, so a point of the g
  // sweep maps into f's frame by a yaw of theta followed by -shift.
  const Eigen::Vector3d t =
      -shift_pixels[0] * resolution * conv.left_vector() - shift_pixels[1] * resolution * conv.forward_vector();
  const RigidTransform yaw = RigidTransform::rotation_about(conv.up_vector(), theta);
  return {yaw.rotation(), t};
}

void PocParams::validate() const {
  if (!(r_min >= 0.0) || cog_radius < 0 || !(magnitude_floor >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "invalid phase correlation parameters");
  }
  if (!(max_abs_rotation >= std::numbers::pi / 2)) {
    throw Error(ErrorCode::InvalidArgument, "max_abs_rotation must be at least pi/2");
  }
}

CoarseTransform estimate_coarse_images(const Image& f_prob, const Image& g_prob, double resolution,
                                       const FrameConvention& conv, const PocParams& params) {
  require_square_same(f_prob, g_prob);
  const Image fw = window(f_prob);
  const RotationEstimate rot = estimate_rotation(fw, window(g_prob), params);

  CoarseTransform best;
  bool have = false;
  params.validate();
  for (const double candidate : {rot.theta, normalize_full_turn(rot.theta + std::numbers::pi)}) {
    if (have && std::abs(candidate) > params.max_abs_rotation) continue;
    const Image derotated = window(rotate_image(g_prob, -candidate));
    const PocPeak peak = cross_power_peak(fw, derotated, params);
    if (!have || peak.peak_value > best.translation_peak) {
      have = true;
      best.theta = candidate;
      best.shift_pixels = peak.shift;
      best.translation_peak = peak.peak_value;
    }
  }
  best.rotation_peak = rot.peak.peak_value;
  best.confidence = std::min(best.rotation_peak, best.translation_peak);
  best.low_confidence = best.confidence < params.low_confidence_threshold;
  best.transform = coarse_to_rigid(best.theta, best.shift_pixels, resolution, conv);
  return best;
}

CoarseTransform estimate_coarse(const OccupancyGrid& f, const OccupancyGrid& g, const FrameConvention& conv,
                                const PocParams& params) {
  if (f.params.n != g.params.n || f.params.resolution != g.params.resolution) {
    throw Error(ErrorCode::InvalidArgument, "grids must share size and resolution");
  }
  return estimate_coarse_images(to_probability(f), to_probability(g), f.params.resolution, conv, params);
}

}  // namespace pocodom
