#include <cmath>
#include <filesystem>

#include "doctest.h"

#include "camworld/body_model.hpp"
#include "camworld/errors.hpp"
#include "camworld/rasterizer.hpp"
#include "camworld/rng.hpp"
#include "test_helpers.hpp"

using namespace camworld;
namespace fs = std::filesystem;

namespace {

Mesh single_triangle(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                     const Eigen::Vector3d& c) {
  Mesh m;
  m.vertices.resize(3, 3);
  m.vertices.row(0) = a;
  m.vertices.row(1) = b;
  m.vertices.row(2) = c;
  m.faces = {{0, 1, 2}};
  m.joints.resize(0, 3);
  return m;
}

Mesh random_soup(Rng& rng, int triangles) {
  Mesh m;
  m.vertices.resize(3 * triangles, 3);
  for (int t = 0; t < triangles; ++t) {
    const Eigen::Vector3d center(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                                 rng.uniform(2.0, 6.0));
    for (int v = 0; v < 3; ++v) {
      m.vertices.row(3 * t + v) =
          center + Eigen::Vector3d(rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6),
                                   rng.uniform(-0.4, 0.4));
    }
    m.faces.push_back({3 * t, 3 * t + 1, 3 * t + 2});
  }
  m.joints.resize(0, 3);
  return m;
}

bool identical_coverage_close_depth(const DepthMap& a, const DepthMap& b, double tol) {
  if (a.width != b.width || a.height != b.height) return false;
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      if (a.covered(x, y) != b.covered(x, y)) return false;
      if (a.covered(x, y) && std::abs(a.at(x, y) - b.at(x, y)) > tol) return false;
    }
  }
  return true;
}

const Intrinsics kSmallCam{32.0, 32, 32};

}  // namespace

TEST_CASE("single-surface depth") {
  const Extrinsics ident;
  const Eigen::Vector3d zero = Eigen::Vector3d::Zero();

  SUBCASE("flat triangle over the center pixel reads its depth") {
    const Mesh m = single_triangle({-2.0, -2.0, 5.0}, {2.0, -2.0, 5.0}, {0.0, 2.0, 5.0});
    const DepthMap d = render_depth(m, kSmallCam, ident, zero);
    CHECK(d.covered(16, 16));
    CHECK(d.at(16, 16) == doctest::Approx(5.0).epsilon(1e-12));
  }

  SUBCASE("nearer of two overlapping triangles wins") {
    Mesh m = single_triangle({-2.0, -2.0, 5.0}, {2.0, -2.0, 5.0}, {0.0, 2.0, 5.0});
    const Mesh near = single_triangle({-2.0, -2.0, 3.0}, {2.0, -2.0, 3.0}, {0.0, 2.0, 3.0});
    m.vertices.conservativeResize(6, 3);
    m.vertices.bottomRows(3) = near.vertices;
    m.faces.push_back({3, 4, 5});
    const DepthMap d = render_depth(m, kSmallCam, ident, zero);
    CHECK(d.at(16, 16) == doctest::Approx(3.0).epsilon(1e-12));
  }

  SUBCASE("empty mesh renders pure background") {
    Mesh m;
    m.vertices.resize(0, 3);
    m.joints.resize(0, 3);
    const DepthMap d = render_depth(m, kSmallCam, ident, zero);
    CHECK(d.covered_count() == 0);
  }

  SUBCASE("zero-size image is rejected") {
    CHECK_THROWS_AS(DepthMap(0, 16), ValidationError);
  }
}

TEST_CASE("rasterizer matches the ray-casting oracle") {
  const Extrinsics ident;
  const Eigen::Vector3d zero = Eigen::Vector3d::Zero();

  SUBCASE("single triangle cases") {
    const Mesh m = single_triangle({-2.0, -2.0, 5.0}, {2.0, -2.0, 5.0}, {0.0, 2.0, 5.0});
    const DepthMap a = render_depth(m, kSmallCam, ident, zero);
    const DepthMap b = render_depth_oracle(m, kSmallCam, ident, zero);
    CHECK(identical_coverage_close_depth(a, b, 1e-9));
    CHECK(b.covered(16, 16));
  }

  SUBCASE("seeded twenty-triangle soups") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng rng(seed);
      const Mesh m = random_soup(rng, 20);
      const DepthMap a = render_depth(m, kSmallCam, ident, zero);
      const DepthMap b = render_depth_oracle(m, kSmallCam, ident, zero);
      CHECK(identical_coverage_close_depth(a, b, 1e-9));
      CHECK(a.covered_count() > 0);
    }
  }

  SUBCASE("toy body at 64x64 under a pitched camera") {
    const BodyModelSpec spec = toy_body_spec();
    Rng rng(99);
    BodyParams p = testing::random_params(rng, spec.joint_count(), 0.4, 0.5);
    p.translation = Eigen::Vector3d(0.0, 0.0, 3.0);
    const Mesh mesh = lbs_forward(spec, p);
    Extrinsics ext;
    ext.pitch = deg_to_rad(18.0);
    p.translation = pitch_rotation(ext.pitch).transpose() * Eigen::Vector3d(0.0, 0.0, 3.0);
    const Mesh mesh_front = lbs_forward(spec, p);
    const Intrinsics intr = intrinsics_from_fov(64, 64, deg_to_rad(60.0));
    const DepthMap a = render_depth(mesh_front, intr, ext, Eigen::Vector3d::Zero());
    const DepthMap b = render_depth_oracle(mesh_front, intr, ext, Eigen::Vector3d::Zero());
    CHECK(a.covered_count() > 50);
    CHECK(identical_coverage_close_depth(a, b, 1e-9));
    (void)mesh;
  }
}

TEST_CASE("rendering invariances") {
  const Extrinsics ident;
  const Eigen::Vector3d zero = Eigen::Vector3d::Zero();
  Rng rng(7);
  const Mesh m = random_soup(rng, 15);

  SUBCASE("face submission order does not matter") {
    Mesh permuted = m;
    Rng perm_rng(11);
    for (size_t i = permuted.faces.size(); i > 1; --i) {
      std::swap(permuted.faces[i - 1], permuted.faces[perm_rng.bounded(i)]);
    }
    const DepthMap a = render_depth(m, kSmallCam, ident, zero);
    const DepthMap b = render_depth(permuted, kSmallCam, ident, zero);
    CHECK(a.depth == b.depth);
  }

  SUBCASE("depth stays within the vertex depth range") {
    const DepthMap d = render_depth(m, kSmallCam, ident, zero);
    const double lo = m.vertices.col(2).minCoeff() - 1e-6;
    const double hi = m.vertices.col(2).maxCoeff() + 1e-6;
    for (int y = 0; y < d.height; ++y) {
      for (int x = 0; x < d.width; ++x) {
        if (!d.covered(x, y)) continue;
        CHECK(d.at(x, y) >= lo);
        CHECK(d.at(x, y) <= hi);
      }
    }
  }

  SUBCASE("near-plane triangles are dropped whole") {
    const Mesh close = single_triangle({-1.0, -1.0, 5e-4}, {1.0, -1.0, 5e-4}, {0.0, 1.0, 5.0});
    const DepthMap d = render_depth(close, kSmallCam, ident, zero);
    CHECK(d.covered_count() == 0);
  }
}

TEST_CASE("crop and resize") {
  SUBCASE("native full-image crop is the identity") {
    DepthMap d(256, 256);
    Rng rng(13);
    for (auto& v : d.depth) v = rng.uniform(1.0, 9.0);
    const DepthMap out = crop_resize_depth(d, BBox{0.0, 0.0, 256.0}, 256);
    CHECK(out.depth == d.depth);
  }

  SUBCASE("constant map stays constant") {
    DepthMap d(64, 64);
    for (auto& v : d.depth) v = 4.25;
    const DepthMap out = crop_resize_depth(d, BBox{3.0, -2.0, 40.0}, 32);
    for (double v : out.depth) CHECK(v == 4.25);
  }

  SUBCASE("checkerboard upsamples into replicated blocks") {
    DepthMap d(2, 2);
    d.at(0, 0) = 1.0;
    d.at(1, 0) = 2.0;
    d.at(0, 1) = 3.0;
    d.at(1, 1) = 4.0;
    const DepthMap out = crop_resize_depth(d, BBox{0.0, 0.0, 2.0}, 4);
    CHECK(out.at(0, 0) == 1.0);
    CHECK(out.at(1, 1) == 1.0);
    CHECK(out.at(2, 0) == 2.0);
    CHECK(out.at(3, 1) == 2.0);
    CHECK(out.at(0, 2) == 3.0);
    CHECK(out.at(1, 3) == 3.0);
    CHECK(out.at(2, 2) == 4.0);
    CHECK(out.at(3, 3) == 4.0);
  }

  SUBCASE("background propagates through out-of-image samples") {
    DepthMap d(16, 16);
    for (auto& v : d.depth) v = 2.0;
    const DepthMap out = crop_resize_depth(d, BBox{7.0, 0.0, 16.0}, 16);
    CHECK(!out.covered(15, 8));
    CHECK(out.at(0, 8) == 2.0);
  }

  SUBCASE("disjoint crop is rejected") {
    DepthMap d(16, 16);
    CHECK_THROWS_AS(crop_resize_depth(d, BBox{100.0, 0.0, 8.0}, 8), ValidationError);
  }
}

TEST_CASE("pfm round trip") {
  DepthMap d(20, 12);
  Rng rng(17);
  for (auto& v : d.depth) {
    v = rng.uniform() < 0.3 ? DepthMap::kBackground
                            : static_cast<double>(static_cast<float>(rng.uniform(0.5, 8.0)));
  }
  const fs::path dir = fs::temp_directory_path() / "camworld_tests";
  fs::create_directories(dir);
  const std::string path = (dir / "depth.pfm").string();
  write_pfm(d, path);
  const DepthMap back = read_pfm(path);
  CHECK(back.width == d.width);
  CHECK(back.height == d.height);
  CHECK(back.depth == d.depth);  // values were float-representable

  SUBCASE("missing file and bad header") {
    CHECK_THROWS_AS(read_pfm("/nonexistent.pfm"), IoError);
  }
}
