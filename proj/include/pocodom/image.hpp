#pragma once

#include <Eigen/Core>

#include <complex>
#include <string>

namespace pocodom {

/// Row-major raster. Row index runs along the grid's n1 (left) axis, column
/// index along n2 (forward).
using Image = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexImage = Eigen::Array<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CountImage = Eigen::Array<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Index of the pixel that holds coordinate 0 (and the DC bin after a shift).
inline int center_index(int n) { return n / 2; }

/// Moves index 0 to the centre (numpy.fft.fftshift semantics).
template <typename Derived>
Derived fftshift(const Derived& in) {
  const auto rows = in.rows(), cols = in.cols();
  Derived out(rows, cols);
  const auto sr = rows / 2, sc = cols / 2;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) out((r + sr) % rows, (c + sc) % cols) = in(r, c);
  }
  return out;
}

template <typename Derived>
Derived ifftshift(const Derived& in) {
  const auto rows = in.rows(), cols = in.cols();
  Derived out(rows, cols);
  const auto sr = rows - rows / 2, sc = cols - cols / 2;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) out((r + sr) % rows, (c + sc) % cols) = in(r, c);
  }
  return out;
}

/// Circular shift: out(r, c) = in(r - dr, c - dc).
Image circular_shift(const Image& in, int dr, int dc);

/// Bilinear sample; pixels outside the raster read as 0.
double sample_bilinear(const Image& img, double row, double col);

/// Writes an 8-bit binary PGM. Values are mapped linearly from [lo, hi] to
/// [0, 255] and clamped.
void write_pgm(const std::string& path, const Image& img, double lo, double hi);
/// Same, with lo/hi taken from the image range.
void write_pgm_autoscale(const std::string& path, const Image& img);
Image read_pgm(const std::string& path);

}  // namespace pocodom
