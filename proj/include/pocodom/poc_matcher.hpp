#pragma once

#include <Eigen/Core>

#include "pocodom/geometry.hpp"
#include "pocodom/image.hpp"
#include "pocodom/occupancy_grid.hpp"

namespace pocodom {

struct PocParams {
  /// Polar maps sample radii in (r_min, n/2); the low-frequency disk below
  /// r_min is left out.
  double r_min = 5.0;
  /// Half-width of the centre-of-gravity window around the integer peak.
  int cog_radius = 1;
  /// Cross-power bins whose magnitude falls below this are zeroed.
  double magnitude_floor = 1e-12;
  double low_confidence_threshold = 0.1;
  /// The half-turn alternative theta + pi is only tried when its magnitude
  /// stays within this bound (must be >= pi/2). Below pi the smaller of the
  /// two candidates always wins.
  double max_abs_rotation = 3.141592653589793;
  /// Correlate log(1 + |F|) polar maps for the rotation instead of |F|.
  bool log_magnitude = true;

  void validate() const;
};

struct PocPeak {
  /// Sub-pixel (row, col) shift with b(n) ~ a(n - shift), each component in
  /// [-n/2, n/2).
  Eigen::Vector2d shift = Eigen::Vector2d::Zero();
  /// Correlation value at the integer peak, clamped to [0, 1].
  double peak_value = 0.0;
  /// Integer (row, col) peak position in the correlation surface.
  Eigen::Vector2i integer_peak = Eigen::Vector2i::Zero();
  bool low_confidence = false;
};

struct RotationEstimate {
  /// Content rotation of g relative to f, in (-pi/2, pi/2].
  double theta = 0.0;
  PocPeak peak;
};

struct CoarseTransform {
  /// Yaw about the up axis, radians.
  double theta = 0.0;
  /// Translation-stage POC shift (n1, n2) in pixels.
  Eigen::Vector2d shift_pixels = Eigen::Vector2d::Zero();
  /// Maps points of the g sweep into the f sweep's frame.
  RigidTransform transform;
  double confidence = 0.0;
  double rotation_peak = 0.0;
  double translation_peak = 0.0;
  bool low_confidence = false;
};

/// Separable Hann window of side n: w(i) = 0.5 (1 - cos(2 pi i / (n - 1))).
Image hann_window(int n);
Image window(const Image& img);

/// |DFT(img)| with DC at (n/2, n/2).
Image amplitude_spectrum(const Image& img);

/// Real part of IDFT((A . conj(B)) / |A . conj(B)|), unshifted: a shift of
/// b by +d puts the peak at index -d (mod n).
Image correlation_surface(const Image& a, const Image& b, const PocParams& params = {});

PocPeak cross_power_peak(const Image& a, const Image& b, const PocParams& params = {});

/// Resamples a DC-centred magnitude onto rows = radius in (r_min, n/2) and
/// cols = angle in [0, pi), both over n bins, bilinear, 0 outside the raster.
Image polar_map(const Image& magnitude, double r_min = 5.0);

/// Rotates content about the centre pixel by `angle` in the (row, col)
/// plane: out(x) = in(R(-angle) x). Samples outside read as 0.
Image rotate_image(const Image& img, double angle);

/// Both inputs must already be windowed.
RotationEstimate estimate_rotation(const Image& f_windowed, const Image& g_windowed, const PocParams& params = {});

/// Rotation from the polar-mapped amplitude spectra, then translation from
/// POC between f and g de-rotated by theta and by theta + pi (the candidate
/// with the larger peak wins).
CoarseTransform estimate_coarse(const OccupancyGrid& f, const OccupancyGrid& g, const FrameConvention& conv,
                                const PocParams& params = {});

/// Same chain starting from probability images of side n with the given
/// resolution.
CoarseTransform estimate_coarse_images(const Image& f_prob, const Image& g_prob, double resolution,
                                       const FrameConvention& conv, const PocParams& params = {});

/// Metric form of a (theta, shift) estimate in the given frame convention.
RigidTransform coarse_to_rigid(double theta, const Eigen::Vector2d& shift_pixels, double resolution,
                               const FrameConvention& conv);

}  // namespace pocodom
