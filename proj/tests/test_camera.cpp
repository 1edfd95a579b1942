#include <cmath>

#include <Eigen/Dense>

#include "doctest.h"

#include "camworld/camera.hpp"
#include "camworld/errors.hpp"
#include "camworld/rng.hpp"
#include "camworld/types.hpp"

using namespace camworld;

TEST_CASE("intrinsics from diagonal fov") {
  SUBCASE("default fov makes focal equal the image diagonal") {
    const Intrinsics intr = intrinsics_from_fov(1920, 1080, default_fov_rad());
    CHECK(intr.focal == doctest::Approx(2202.91).epsilon(1e-5));
    CHECK(intr.focal == doctest::Approx(image_diagonal(1920, 1080)).epsilon(1e-12));
  }
  SUBCASE("55 degree fov") {
    const Intrinsics intr = intrinsics_from_fov(1920, 1080, deg_to_rad(55.0));
    CHECK(intr.focal == doctest::Approx(2115.8).epsilon(1e-4));
  }
  SUBCASE("right-angle fov gives half the diagonal") {
    const Intrinsics intr = intrinsics_from_fov(1000, 1000, deg_to_rad(90.0));
    CHECK(intr.focal == doctest::Approx(image_diagonal(1000, 1000) / 2.0).epsilon(1e-12));
  }
  SUBCASE("rejects bad inputs") {
    CHECK_THROWS_AS(intrinsics_from_fov(0, 100, 1.0), ValidationError);
    CHECK_THROWS_AS(intrinsics_from_fov(100, 100, 0.0), ValidationError);
    CHECK_THROWS_AS(intrinsics_from_fov(100, 100, 4.0), ValidationError);
  }
}

TEST_CASE("euler rotations") {
  SUBCASE("zero angles give the identity") {
    CHECK((rotation_from_euler(0, 0, 0) - Eigen::Matrix3d::Identity()).norm() == 0.0);
  }
  SUBCASE("quarter-turn pitch matrix") {
    Eigen::Matrix3d expect;
    expect << 1, 0, 0, 0, 0, -1, 0, 1, 0;
    CHECK((rotation_from_euler(deg_to_rad(90.0), 0, 0) - expect).cwiseAbs().maxCoeff() <
          1e-15);
  }
  SUBCASE("30 degree pitch moves a forward point up") {
    const Eigen::Vector3d p = rotation_from_euler(deg_to_rad(30.0), 0, 0) *
                              Eigen::Vector3d(0, 0, 1);
    CHECK(p.x() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(p.y() == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(p.z() == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-12));
  }
  SUBCASE("orthonormal for random angles") {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
      const Eigen::Matrix3d r = rotation_from_euler(rng.uniform(-3.0, 3.0),
                                                    rng.uniform(-3.0, 3.0),
                                                    rng.uniform(-3.0, 3.0));
      CHECK((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("projection") {
  const Intrinsics intr{1000.0, 1920, 1080};
  const Extrinsics ident;
  const Eigen::Vector3d no_offset = Eigen::Vector3d::Zero();

  SUBCASE("optical axis hits the principal point") {
    Points3 p(1, 3);
    p << 0, 0, 5;
    const Points2 px = project(p, intr, ident, no_offset);
    CHECK(px(0, 0) == doctest::Approx(960.0).epsilon(1e-12));
    CHECK(px(0, 1) == doctest::Approx(540.0).epsilon(1e-12));
  }
  SUBCASE("lateral offset scales by focal over depth") {
    Points3 p(1, 3);
    p << 1, 0, 5;
    const Points2 px = project(p, intr, ident, no_offset);
    CHECK(px(0, 0) == doctest::Approx(1160.0).epsilon(1e-12));
    CHECK(px(0, 1) == doctest::Approx(540.0).epsilon(1e-12));
  }
  SUBCASE("behind-camera point throws with its index") {
    Points3 p(2, 3);
    p << 0, 0, 5, 0, 0, -1;
    CHECK_THROWS_WITH_AS(project(p, intr, ident, no_offset),
                         doctest::Contains("point 1"), CameraError);
  }
  SUBCASE("doubling focal doubles the offset from the principal point") {
    Rng rng(3);
    Intrinsics twice = intr;
    twice.focal *= 2.0;
    for (int i = 0; i < 200; ++i) {
      Points3 p(1, 3);
      p << rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(1, 10);
      const Points2 a = project(p, intr, ident, no_offset);
      const Points2 b = project(p, twice, ident, no_offset);
      CHECK(b(0, 0) - intr.cx() == doctest::Approx(2.0 * (a(0, 0) - intr.cx())).epsilon(1e-9));
      CHECK(b(0, 1) - intr.cy() == doctest::Approx(2.0 * (a(0, 1) - intr.cy())).epsilon(1e-9));
    }
  }
  SUBCASE("positive pitch lifts a straight-ahead point above the center") {
    Rng rng(11);
    for (int i = 0; i < 100; ++i) {
      Extrinsics ext;
      ext.pitch = rng.uniform(deg_to_rad(1.0), deg_to_rad(44.0));
      Points3 p(1, 3);
      p << 0, 0, rng.uniform(0.5, 20.0);
      const Points2 px = project(p, intr, ext, no_offset);
      CHECK(px(0, 1) < intr.cy());
    }
  }
}

TEST_CASE("bbox encoding") {
  SUBCASE("centered box") {
    const BBoxEncoding e = bbox_encode(0.0, 0.0, 123.0, 1920, 1080);
    CHECK(e.cx_norm == 0.0);
    CHECK(e.cy_norm == 0.0);
    CHECK(e.b_norm == doctest::Approx(123.0 / image_diagonal(1920, 1080)).epsilon(1e-15));
  }
  SUBCASE("worked example") {
    const BBoxEncoding e = bbox_encode(100.0, -50.0, 300.0, 1920, 1080);
    CHECK(e.cx_norm == doctest::Approx(0.04540).epsilon(1e-4));
    CHECK(e.cy_norm == doctest::Approx(-0.02270).epsilon(1e-4));
    CHECK(e.b_norm == doctest::Approx(0.13618).epsilon(1e-4));
  }
  SUBCASE("zero-size box is rejected") {
    CHECK_THROWS_AS(bbox_encode(0.0, 0.0, 0.0, 640, 480), ValidationError);
  }
  SUBCASE("scale invariance, power-of-two scales exactly") {
    const BBoxEncoding base = bbox_encode(100.0, -50.0, 300.0, 1920, 1080);
    for (double s : {2.0, 4.0, 0.5, 8.0}) {
      const BBoxEncoding e = bbox_encode(100.0 * s, -50.0 * s, 300.0 * s,
                                         static_cast<int>(1920 * s), static_cast<int>(1080 * s));
      CHECK(e.cx_norm == base.cx_norm);
      CHECK(e.cy_norm == base.cy_norm);
      CHECK(e.b_norm == base.b_norm);
    }
  }
}

TEST_CASE("bbox from projected points") {
  SUBCASE("single point gets the minimum box") {
    Points2 p(1, 2);
    p << 960.0, 540.0;
    const BBox box = bbox_from_projection(p, 1920, 1080);
    CHECK(box.cx == 0.0);
    CHECK(box.cy == 0.0);
    CHECK(box.b == 1.0);
  }
  SUBCASE("worked two-point example") {
    Points2 p(2, 2);
    p << 0.0, 0.0, 10.0, 20.0;
    const BBox box = bbox_from_projection(p, 1920, 1080);
    CHECK(box.cx == doctest::Approx(-955.0).epsilon(1e-12));
    CHECK(box.cy == doctest::Approx(-530.0).epsilon(1e-12));
    CHECK(box.b == doctest::Approx(20.0).epsilon(1e-12));
  }
  SUBCASE("empty input is rejected") {
    CHECK_THROWS_AS(bbox_from_projection(Points2(0, 2), 640, 480), ValidationError);
  }
  SUBCASE("containment on random clouds") {
    Rng rng(23);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 1 + static_cast<int>(rng.bounded(40));
      Points2 p(n, 2);
      for (int i = 0; i < n; ++i) {
        p(i, 0) = rng.uniform(-500.0, 2500.0);
        p(i, 1) = rng.uniform(-500.0, 1500.0);
      }
      const BBox box = bbox_from_projection(p, 1920, 1080);
      const double cx_img = box.cx + 960.0;
      const double cy_img = box.cy + 540.0;
      for (int i = 0; i < n; ++i) {
        CHECK(std::abs(p(i, 0) - cx_img) <= box.b / 2.0 + 1e-9 * box.b);
        CHECK(std::abs(p(i, 1) - cy_img) <= box.b / 2.0 + 1e-9 * box.b);
      }
    }
  }
}
