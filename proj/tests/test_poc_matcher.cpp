#include <doctest.h>

#include "pocodom/error.hpp"
#include "pocodom/fft.hpp"
#include "pocodom/poc_matcher.hpp"
#include "support.hpp"

using namespace pocodom;
using namespace testing;

namespace {

double wrap_angle(double a) {
  while (a <= -std::numbers::pi) a += 2 * std::numbers::pi;
  while (a > std::numbers::pi) a -= 2 * std::numbers::pi;
  return a;
}

// Box outlines scattered over a 60 m square at random headings, as a lidar
// would see walls.
std::vector<Point3> box_field(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> where(-30.0, 30.0), size(1.0, 8.0), heading(0.0, std::numbers::pi);
  std::vector<Point3> pts;
  for (int k = 0; k < 40; ++k) {
    const double x = where(rng), y = where(rng), w = size(rng), d = size(rng);
    std::vector<Point3> box;
    add_box_surface(box, {-w / 2, -d / 2, 0.0}, {w / 2, d / 2, 1.0}, 0.1);
    const RigidTransform place(RigidTransform::rotation_about(Eigen::Vector3d::UnitZ(), heading(rng)).rotation(),
                               {x, y, 0.0});
    for (const Point3& p : box) pts.push_back(place * p);
  }
  return pts;
}

int best_column_shift(const Image& a, const Image& b, int max_shift) {
  // argmin_s sum (a(:, j) - b(:, j - s))^2 over circular column shifts.
  int best = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (int s = -max_shift; s <= max_shift; ++s) {
    const double err = (a - circular_shift(b, 0, s)).square().sum();
    if (err < best_err) {
      best_err = err;
      best = s;
    }
  }
  return best;
}

}  // namespace

TEST_SUITE("poc_matcher") {
  TEST_CASE("fft matches the direct DFT") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto [rows, cols] : {std::pair{8, 8}, std::pair{7, 5}, std::pair{6, 10}}) {
      Image img(rows, cols);
      for (Eigen::Index i = 0; i < img.size(); ++i) img.data()[i] = u(rng);
      const ComplexImage want = naive_dft(img);
      CHECK((fft2(img) - want).abs().maxCoeff() < 1e-10);
      CHECK((fft2(ComplexImage(img.cast<std::complex<double>>())) - want).abs().maxCoeff() < 1e-10);
      CHECK((ifft2(fft2(img)).real() - img).abs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("hann window") {
    for (int n : {63, 64}) {
      const Image w = hann_window(n);
      CHECK(w(0, 0) == 0.0);
      CHECK(w(n - 1, n - 1) == doctest::Approx(0.0));
      const Image ones = window(Image::Ones(n, n));
      if (n % 2 == 1) {
        CHECK(ones(n / 2, n / 2) == doctest::Approx(1.0).epsilon(1e-15));
      } else {
        CHECK(ones(n / 2, n / 2) == doctest::Approx(ones.maxCoeff()));
      }
      const std::vector<double> h = hann_1d(n);
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) CHECK(w(r, c) == doctest::Approx(h[r] * h[c]).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("amplitude spectrum") {
    const int n = 64, c = n / 2;
    const Image flat = amplitude_spectrum(Image::Constant(n, n, 2.0));
    CHECK(flat(c, c) == doctest::Approx(2.0 * n * n));
    CHECK(flat.sum() - flat(c, c) < 1e-9);

    const Image img = structured_image(n, 3);
    CHECK((amplitude_spectrum(circular_shift(img, 7, -11)) - amplitude_spectrum(img)).abs().maxCoeff() < 1e-6);

    // cos(2 pi 4 r / n): two lines of energy at row frequency +-4.
    Image cosine(n, n);
    for (int r = 0; r < n; ++r) cosine.row(r).setConstant(std::cos(2 * std::numbers::pi * 4 * r / n));
    const Image s = amplitude_spectrum(cosine);
    CHECK(s(c + 4, c) == doctest::Approx(n * n / 2.0));
    CHECK(s(c - 4, c) == doctest::Approx(n * n / 2.0));
    CHECK(s.sum() == doctest::Approx(n * n));
  }

  TEST_CASE("phase correlation: integer shifts are exact") {
    const int n = 128;
    const Image a = structured_image(n, 4);
    const PocPeak same = cross_power_peak(a, a);
    CHECK(same.shift.norm() < 1e-9);
    CHECK(same.peak_value == doctest::Approx(1.0));

    const PocPeak p = cross_power_peak(a, circular_shift(a, 5, -3));
    CHECK(std::abs(p.shift[0] - 5.0) < 1e-9);
    CHECK(std::abs(p.shift[1] + 3.0) < 1e-9);

    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> d(-50, 50);
    for (int k = 0; k < 20; ++k) {
      const int dr = d(rng), dc = d(rng);
      const PocPeak q = cross_power_peak(a, circular_shift(a, dr, dc));
      CHECK(std::abs(q.shift[0] - dr) < 1e-9);
      CHECK(std::abs(q.shift[1] - dc) < 1e-9);
    }
  }

  TEST_CASE("phase correlation: sub-pixel shift") {
    const Image a = structured_image(128, 6);
    const PocPeak p = cross_power_peak(a, fourier_shift(a, 2.5, 0.0));
    CHECK(std::abs(p.shift[0] - 2.5) < 0.2);
    CHECK(std::abs(p.shift[1]) < 0.2);
    const PocPeak q = cross_power_peak(a, fourier_shift(a, -1.5, 2.5));
    CHECK(std::abs(q.shift[0] + 1.5) < 0.2);
    CHECK(std::abs(q.shift[1] - 2.5) < 0.2);
  }

  TEST_CASE("phase correlation is antisymmetric") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> d(-10.0, 10.0);
    for (int k = 0; k < 10; ++k) {
      const Image a = structured_image(64, 100 + k);
      const Image b = fourier_shift(a, d(rng), d(rng));
      const PocPeak ab = cross_power_peak(a, b), ba = cross_power_peak(b, a);
      CHECK((ab.shift + ba.shift).norm() < 0.4);
    }
  }

  TEST_CASE("polar map") {
    const int n = 128, c = n / 2;
    Image radial(n, n);
    // Smooth bump that vanishes before the outermost polar radius.
    for (int r = 0; r < n; ++r) {
      for (int k = 0; k < n; ++k) {
        const double rho = std::hypot(r - c, k - c);
        radial(r, k) = rho < 60.0 ? std::pow(std::cos(std::numbers::pi * rho / 120.0), 2) : 0.0;
      }
    }
    const Image p = polar_map(radial, 5.0);
    for (int i = 0; i < n; ++i) CHECK(p.row(i).maxCoeff() - p.row(i).minCoeff() < 1e-3);

    // DC excluded: the mean level does not leak into the polar map.
    const Image img = window(structured_image(n, 8));
    const Image lifted = window(structured_image(n, 8) + 3.0);
    const Image pa = polar_map(amplitude_spectrum(img), 5.0);
    const Image pb = polar_map(amplitude_spectrum(img + 3.0), 5.0);
    CHECK((pa - pb).abs().maxCoeff() < 1e-9 * pa.abs().maxCoeff());
    (void)lifted;

    // Rotating the content by 10 degrees rolls the angular axis by 10 N / 180.
    const Image f = structured_image(n, 9);
    const Image g = rotate_image(f, deg(10));
    const Image fp = polar_map(amplitude_spectrum(window(f)), 5.0);
    const Image gp = polar_map(amplitude_spectrum(window(g)), 5.0);
    const double expect = 10.0 * n / 180.0;
    CHECK(std::abs(std::abs(best_column_shift(gp, fp, 20)) - expect) <= 1.0);
  }

  TEST_CASE("rotation estimate") {
    const int n = 256;
    const Image f = structured_image(n, 10);
    const RotationEstimate same = estimate_rotation(window(f), window(f));
    CHECK(std::abs(same.theta) < 1e-9);

    const double bin = std::numbers::pi / n;
    for (double a : {-30.0, -15.0, -5.0, -2.0, 2.0, 5.0, 10.0, 15.0, 30.0}) {
      const RotationEstimate e = estimate_rotation(window(f), window(rotate_image(f, deg(a))));
      CHECK(std::abs(e.theta - deg(a)) <= bin);
      CHECK(std::abs(e.theta - deg(a)) < deg(0.5));
      // theta is the angular shift read in radians.
      CHECK(e.theta == doctest::Approx(std::numbers::pi * e.peak.shift[1] / n));
    }
    // A ten-bin rotation.
    const RotationEstimate ten = estimate_rotation(window(f), window(rotate_image(f, 10 * bin)));
    CHECK(std::abs(ten.theta - 10 * bin) < 0.5 * bin);
  }

  TEST_CASE("half-turn candidates") {
    const int n = 256;
    const Image f = structured_image(n, 11);
    for (double a : {5.0, -20.0}) {
      const double truth = wrap_angle(deg(a) + std::numbers::pi);
      const CoarseTransform c = estimate_coarse_images(f, rotate_image(f, truth), 0.3, FrameConvention::kitti());
      CHECK(std::abs(wrap_angle(c.theta - truth)) < deg(0.5));

      PocParams limited;
      limited.max_abs_rotation = std::numbers::pi / 2;
      const CoarseTransform d =
          estimate_coarse_images(f, rotate_image(f, truth), 0.3, FrameConvention::kitti(), limited);
      CHECK(std::abs(d.theta) <= std::numbers::pi / 2);
    }
  }

  TEST_CASE("coarse estimate from two rasterized sweeps") {
    GridParams grid;
    grid.n = 256;
    const FrameConvention conv = FrameConvention::kitti();
    const PointCloud f = cloud_of(box_field(12));
    const RigidTransform motion(RigidTransform::rotation_about(conv.up_vector(), deg(5)).rotation(), {1.0, 0.0, 0.0});
    const PointCloud g = apply(motion.inverse(), f);
    const CoarseTransform c = estimate_coarse(rasterize(f, grid, conv), rasterize(g, grid, conv), conv);
    CHECK(std::abs(c.theta - deg(5)) < deg(0.5));
    CHECK((c.transform.translation() - motion.translation()).norm() < 1.5 * grid.resolution);
    CHECK_FALSE(c.low_confidence);

    const CoarseTransform same = estimate_coarse(rasterize(f, grid, conv), rasterize(f, grid, conv), conv);
    CHECK(std::abs(same.theta) < 1e-12);
    CHECK(same.transform.translation().norm() < 1e-9);
    CHECK(same.confidence == doctest::Approx(1.0));
  }

  TEST_CASE("3-DOF recovery over random motions") {
    GridParams grid;
    grid.n = 256;
    const FrameConvention conv = FrameConvention::kitti();
    const PointCloud f = cloud_of(box_field(13));
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> yaw(-20.0, 20.0), t(-3.0, 3.0);
    for (int k = 0; k < 6; ++k) {
      const RigidTransform motion(RigidTransform::rotation_about(conv.up_vector(), deg(yaw(rng))).rotation(),
                                  {t(rng), t(rng), 0.0});
      const CoarseTransform c =
          estimate_coarse(rasterize(f, grid, conv), rasterize(apply(motion.inverse(), f), grid, conv), conv);
      const RigidTransform err = motion.inverse() * c.transform;
      CHECK(err.rotation_angle() < deg(0.5));
      CHECK((c.transform.translation() - motion.translation()).norm() <= 1.5 * grid.resolution);
    }
  }

  TEST_CASE("structureless grids are flagged") {
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Image a(128, 128), b(128, 128);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      a.data()[i] = u(rng);
      b.data()[i] = u(rng);
    }
    const CoarseTransform c = estimate_coarse_images(a, b, 0.3, FrameConvention::kitti());
    CHECK(c.low_confidence);
  }

  TEST_CASE("input checks") {
    CHECK_THROWS_AS(cross_power_peak(Image::Zero(8, 8), Image::Zero(8, 9)), Error);
    CHECK_THROWS_AS(window(Image::Zero(4, 5)), Error);
    PocParams bad;
    bad.max_abs_rotation = 1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
  }
}
