#include <doctest.h>

#include "pocodom/error.hpp"
#include "pocodom/geometry.hpp"
#include "support.hpp"

using namespace pocodom;
using namespace testing;

TEST_SUITE("geometry") {
  TEST_CASE("compose identity and inverse") {
    const RigidTransform i = RigidTransform::identity();
    CHECK((compose(i, i).matrix() - Eigen::Matrix4d::Identity()).norm() == 0.0);

    std::mt19937_64 rng(1);
    for (int k = 0; k < 50; ++k) {
      const RigidTransform t = random_transform(rng);
      CHECK((compose(t, invert(t)).matrix() - Eigen::Matrix4d::Identity()).norm() < 1e-9);
      CHECK((compose(invert(t), t).matrix() - Eigen::Matrix4d::Identity()).norm() < 1e-9);
    }
  }

  TEST_CASE("yaw angles add") {
    const Eigen::Vector3d z = Eigen::Vector3d::UnitZ();
    const RigidTransform a = RigidTransform::rotation_about(z, deg(30));
    const RigidTransform b = RigidTransform::rotation_about(z, deg(15));
    CHECK((compose(a, b).rotation() - rot_z_by_hand(deg(45))).norm() < 1e-12);
  }

  TEST_CASE("apply") {
    PointCloud c = cloud_of({{0, 0, 0}, {1, 2, 3}});
    const PointCloud same = apply(RigidTransform::identity(), c);
    CHECK(same.points == c.points);

    const PointCloud moved = apply(RigidTransform::translation({1, 0, 0}), cloud_of({{0, 0, 0}}));
    CHECK(moved.points[0] == Point3(1, 0, 0));

    // Quarter turn about up (z) in a x-forward z-up frame takes forward to left.
    const RigidTransform r = RigidTransform::rotation_about(FrameConvention::kitti().up_vector(), deg(90));
    const PointCloud turned = apply(r, cloud_of({{1, 0, 0}}));
    CHECK((turned.points[0] - Point3(0, 1, 0)).norm() < 1e-12);

    const PointCloud world = apply(r, c, FrameKind::World);
    CHECK(world.frame == FrameKind::World);
  }

  TEST_CASE("frame conversion relabels axes") {
    const FrameConvention kitti = FrameConvention::kitti();
    const FrameConvention l = FrameConvention::lidar_xleft_yup_zforward();
    CHECK(kitti.is_valid());
    CHECK(l.is_valid());

    const PointCloud c = cloud_of({{1, 2, 3}});
    CHECK(convert_frame(c, kitti, kitti).points == c.points);
    // forward 1, left 2, up 3 -> (x = left, y = up, z = forward).
    CHECK(convert_frame(c, kitti, l).points[0] == Point3(2, 3, 1));

    std::mt19937_64 rng(2);
    const PointCloud r = cloud_of(random_points(rng, 500, 50.0));
    CHECK(convert_frame(convert_frame(r, kitti, l), l, kitti).points == r.points);

    const FrameConvention flipped{{2, -1}, {0, 1}, {1, 1}};
    CHECK_FALSE(flipped.is_valid());
    CHECK_THROWS_AS(convert_frame(c, kitti, flipped), Error);
  }

  TEST_CASE("application is associative") {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 200; ++k) {
      const RigidTransform a = random_transform(rng), b = random_transform(rng);
      const Point3 p = random_points(rng, 1, 100.0)[0];
      CHECK(((a * b) * p - a * (b * p)).norm() < 1e-9);
    }
  }

  TEST_CASE("rigid motions preserve distances") {
    std::mt19937_64 rng(4);
    for (int k = 0; k < 200; ++k) {
      const RigidTransform t = random_transform(rng);
      const auto pts = random_points(rng, 2, 100.0);
      CHECK(std::abs((t * pts[0] - t * pts[1]).norm() - (pts[0] - pts[1]).norm()) < 1e-9);
    }
  }

  TEST_CASE("accumulated rotation stays orthonormal") {
    std::mt19937_64 rng(5);
    PoseAccumulator acc;
    for (int k = 0; k < 10000; ++k) acc.push(random_transform(rng, 0.2, 1.0));
    const Eigen::Matrix3d& r = acc.pose().rotation();
    CHECK((r.transpose() * r - Eigen::Matrix3d::Identity()).norm() < 1e-9);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("accumulator is the running product") {
    std::mt19937_64 rng(6);
    PoseAccumulator acc(0);
    Eigen::Matrix4d product = Eigen::Matrix4d::Identity();
    for (int k = 0; k < 50; ++k) {
      const RigidTransform t = random_transform(rng, 0.1, 1.0);
      product = product * t.matrix();
      acc.push(t);
    }
    CHECK((acc.pose().matrix() - product).norm() < 1e-9);
  }

  TEST_CASE("nearest_rotation and from_matrix") {
    std::mt19937_64 rng(7);
    const RigidTransform t = random_transform(rng);
    Eigen::Matrix3d noisy = t.rotation();
    noisy(0, 1) += 1e-4;
    const Eigen::Matrix3d fixed = nearest_rotation(noisy);
    CHECK((fixed.transpose() * fixed - Eigen::Matrix3d::Identity()).norm() < 1e-12);
    CHECK((fixed - t.rotation()).norm() < 1e-4);

    CHECK_NOTHROW(RigidTransform::from_matrix(t.matrix()));
    Eigen::Matrix4d bad = t.matrix();
    bad(0, 0) *= 2.0;
    CHECK_THROWS_AS(RigidTransform::from_matrix(bad), Error);
    Eigen::Matrix4d reflection = Eigen::Matrix4d::Identity();
    reflection(2, 2) = -1.0;
    CHECK_THROWS_AS(RigidTransform::from_matrix(reflection), Error);
  }

  TEST_CASE("rotation_angle") {
    for (double a : {0.0, 1e-9, 1e-5, 0.3, 2.0, 3.1}) {
      const RigidTransform r = RigidTransform::rotation_about({1, 2, 3}, a);
      CHECK(r.rotation_angle() == doctest::Approx(a).epsilon(1e-9));
    }
  }

  TEST_CASE("validate_cloud") {
    CHECK_THROWS_AS(validate_cloud(PointCloud{}), Error);
    try {
      validate_cloud(PointCloud{});
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyCloud);
    }
    PointCloud nan = cloud_of({{0, 0, std::numeric_limits<double>::quiet_NaN()}});
    CHECK_THROWS_AS(validate_cloud(nan), Error);
  }
}
