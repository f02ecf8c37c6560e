#include "pocodom/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace pocodom {

namespace {

// FFTW's planner is not re-entrant; fftw_execute_dft on an existing plan is.
fftw_plan plan_for(int rows, int cols, int sign) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(mutex);
  auto key = std::make_tuple(rows, cols, sign);
  auto it = plans.find(key);
  if (it != plans.end()) return it->second;
  ComplexImage scratch_in(rows, cols), scratch_out(rows, cols);
  fftw_plan plan = fftw_plan_dft_2d(rows, cols, reinterpret_cast<fftw_complex*>(scratch_in.data()),
                                    reinterpret_cast<fftw_complex*>(scratch_out.data()), sign,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans.emplace(key, plan);
  return plan;
}

ComplexImage execute(ComplexImage in, int sign) {
  const auto rows = static_cast<int>(in.rows()), cols = static_cast<int>(in.cols());
  ComplexImage out(rows, cols);
  fftw_execute_dft(plan_for(rows, cols, sign), reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

}  // namespace

ComplexImage fft2(const Image& in) {
  const auto rows = static_cast<int>(in.rows()), cols = static_cast<int>(in.cols());
  const int half = cols / 2 + 1;
  fftw_plan plan;
  {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, fftw_plan> plans;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = plans.find({rows, cols});
    if (it == plans.end()) {
      Image scratch_in(rows, cols);
      ComplexImage scratch_out(rows, half);
      plan = fftw_plan_dft_r2c_2d(rows, cols, scratch_in.data(), reinterpret_cast<fftw_complex*>(scratch_out.data()),
                                  FFTW_ESTIMATE | FFTW_UNALIGNED);
      plans.emplace(std::make_pair(rows, cols), plan);
    } else {
      plan = it->second;
    }
  }
  Image src = in;  // r2c plans may scribble on their input
  ComplexImage packed(rows, half);
  fftw_execute_dft_r2c(plan, src.data(), reinterpret_cast<fftw_complex*>(packed.data()));

  // Fill the redundant half from Hermitian symmetry F(r, c) = conj F(-r, -c).
  ComplexImage out(rows, cols);
  out.leftCols(half) = packed;
  for (int r = 0; r < rows; ++r) {
    const int mr = (rows - r) % rows;
    for (int c = half; c < cols; ++c) out(r, c) = std::conj(packed(mr, cols - c));
  }
  return out;
}

ComplexImage fft2(const ComplexImage& in) { return execute(in, FFTW_FORWARD); }

ComplexImage ifft2(const ComplexImage& in) {
  ComplexImage out = execute(in, FFTW_BACKWARD);
  out /= static_cast<double>(in.rows() * in.cols());
  return out;
}

}  // namespace pocodom
