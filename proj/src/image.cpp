#include "pocodom/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "pocodom/error.hpp"

namespace pocodom {

Image circular_shift(const Image& in, int dr, int dc) {
  const auto rows = static_cast<int>(in.rows()), cols = static_cast<int>(in.cols());
  Image out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const int sr = ((r - dr) % rows + rows) % rows;
    for (int c = 0; c < cols; ++c) out(r, c) = in(sr, ((c - dc) % cols + cols) % cols);
  }
  return out;
}

double sample_bilinear(const Image& img, double row, double col) {
  const double fr = std::floor(row), fc = std::floor(col);
  const auto r0 = static_cast<Eigen::Index>(fr), c0 = static_cast<Eigen::Index>(fc);
  const double wr = row - fr, wc = col - fc;
  auto at = [&](Eigen::Index r, Eigen::Index c) -> double {
    if (r < 0 || c < 0 || r >= img.rows() || c >= img.cols()) return 0.0;
    return img(r, c);
  };
  return (1.0 - wr) * ((1.0 - wc) * at(r0, c0) + wc * at(r0, c0 + 1)) +
         wr * ((1.0 - wc) * at(r0 + 1, c0) + wc * at(r0 + 1, c0 + 1));
}

void write_pgm(const std::string& path, const Image& img, double lo, double hi) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  out << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
  const double span = hi > lo ? hi - lo : 1.0;
  std::vector<unsigned char> row(static_cast<std::size_t>(img.cols()));
  for (Eigen::Index r = 0; r < img.rows(); ++r) {
    for (Eigen::Index c = 0; c < img.cols(); ++c) {
      const double v = std::clamp((img(r, c) - lo) / span, 0.0, 1.0);
      row[static_cast<std::size_t>(c)] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

void write_pgm_autoscale(const std::string& path, const Image& img) {
  write_pgm(path, img, img.minCoeff(), img.maxCoeff());
}

Image read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::string magic;
  int cols = 0, rows = 0, maxval = 0;
  in >> magic >> cols >> rows >> maxval;
  in.get();
  if (magic != "P5" || cols <= 0 || rows <= 0 || maxval != 255) {
    throw Error(ErrorCode::MalformedFile, path + " is not an 8-bit binary PGM");
  }
  Image img(rows, cols);
  std::vector<unsigned char> row(static_cast<std::size_t>(cols));
  for (int r = 0; r < rows; ++r) {
    if (!in.read(reinterpret_cast<char*>(row.data()), cols)) throw Error(ErrorCode::MalformedFile, path + " truncated");
    for (int c = 0; c < cols; ++c) img(r, c) = row[static_cast<std::size_t>(c)] / 255.0;
  }
  return img;
}

}  // namespace pocodom
