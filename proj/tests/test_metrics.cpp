#include <cmath>

#include "doctest.h"

#include "camworld/errors.hpp"
#include "camworld/metrics.hpp"
#include "camworld/rng.hpp"
#include "camworld/rotation.hpp"

using namespace camworld;

namespace {

Points3 random_cloud(Rng& rng, int n, double scale = 1.0) {
  Points3 p(n, 3);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) p(i, c) = scale * rng.normal();
  }
  return p;
}

SimilarityTransform random_similarity(Rng& rng) {
  SimilarityTransform t;
  t.scale = rng.uniform(0.3, 3.0);
  t.rotation = axis_angle_to_matrix(
      Eigen::Vector3d(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)));
  t.translation = Eigen::Vector3d(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
  return t;
}

double residual(const Points3& a, const Points3& b) {
  return (a - b).rowwise().norm().mean();
}

}  // namespace

TEST_CASE("procrustes alignment") {
  Rng rng(3);

  SUBCASE("identical sets give the identity transform") {
    const Points3 p = random_cloud(rng, 12);
    const SimilarityTransform t = procrustes_align(p, p);
    CHECK(t.scale == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((t.rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(t.translation.norm() < 1e-10);
  }

  SUBCASE("recovers an exact similarity") {
    const Points3 src = random_cloud(rng, 10);
    Eigen::Matrix3d r90z;
    r90z << 0, -1, 0, 1, 0, 0, 0, 0, 1;
    Points3 dst = 2.0 * (src * r90z.transpose());
    dst.rowwise() += Eigen::RowVector3d(1.0, 2.0, 3.0);
    const SimilarityTransform t = procrustes_align(src, dst);
    CHECK(t.scale == doctest::Approx(2.0).epsilon(1e-9));
    CHECK((t.rotation - r90z).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((t.translation - Eigen::Vector3d(1, 2, 3)).norm() < 1e-9);
  }

  SUBCASE("never worse than leaving the points alone") {
    for (int trial = 0; trial < 100; ++trial) {
      const Points3 a = random_cloud(rng, 8);
      const Points3 b = random_cloud(rng, 8);
      const SimilarityTransform t = procrustes_align(a, b);
      CHECK((t.apply(a) - b).squaredNorm() <= (a - b).squaredNorm() + 1e-12);
    }
  }

  SUBCASE("transform composed with its inverse is the identity") {
    for (int trial = 0; trial < 50; ++trial) {
      const SimilarityTransform t = random_similarity(rng);
      const SimilarityTransform inv = t.inverse();
      const Points3 p = random_cloud(rng, 6);
      CHECK((inv.apply(t.apply(p)) - p).cwiseAbs().maxCoeff() < 1e-10);
    }
  }

  SUBCASE("row permutation of both sets leaves the transform unchanged") {
    const Points3 a = random_cloud(rng, 9);
    const Points3 b = random_cloud(rng, 9);
    const SimilarityTransform t1 = procrustes_align(a, b);
    std::vector<int> perm{4, 7, 1, 0, 8, 2, 6, 3, 5};
    Points3 ap(9, 3), bp(9, 3);
    for (int i = 0; i < 9; ++i) {
      ap.row(i) = a.row(perm[i]);
      bp.row(i) = b.row(perm[i]);
    }
    const SimilarityTransform t2 = procrustes_align(ap, bp);
    CHECK((t1.rotation - t2.rotation).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs(t1.scale - t2.scale) < 1e-10);
    CHECK((t1.translation - t2.translation).norm() < 1e-10);
  }

  SUBCASE("degenerate sources are rejected") {
    Points3 line(5, 3);
    for (int i = 0; i < 5; ++i) line.row(i) = Eigen::RowVector3d(i, 2.0 * i, -i);
    CHECK_THROWS_AS(procrustes_align(line, random_cloud(rng, 5)), ValidationError);
    Points3 tiny(2, 3);
    tiny.setZero();
    CHECK_THROWS_AS(procrustes_align(tiny, tiny), ValidationError);
  }
}

TEST_CASE("position error metrics") {
  Rng rng(5);

  SUBCASE("identical inputs score zero") {
    const Points3 p = random_cloud(rng, 24);
    CHECK(mpjpe_mm(p, p) == 0.0);
    CHECK(pve_mm(p, p) == 0.0);
    CHECK(pa_mpjpe_mm(p, p) < 1e-9);
    CHECK(w_mpjpe_mm(p, p) == 0.0);
  }

  SUBCASE("3-4-5 offset gives five millimeters") {
    const Points3 gt = random_cloud(rng, 24);
    Points3 pred = gt;
    pred.rowwise() += Eigen::RowVector3d(0.003, 0.0, 0.004);
    CHECK(std::abs(mpjpe_mm(pred, gt) - 5.0) < 1e-12);
    CHECK(pa_mpjpe_mm(pred, gt) < 1e-9);  // translation absorbed
  }

  SUBCASE("procrustes-aligned error never exceeds the raw error") {
    for (int trial = 0; trial < 1000; ++trial) {
      const Points3 a = random_cloud(rng, 10);
      const Points3 b = random_cloud(rng, 10);
      CHECK(pa_mpjpe_mm(a, b) <= mpjpe_mm(a, b) * (1.0 + 1e-12) + 1e-12);
    }
  }

  SUBCASE("alignment-residual zero for exact similarities") {
    for (int trial = 0; trial < 100; ++trial) {
      const Points3 a = random_cloud(rng, 12);
      const SimilarityTransform t = random_similarity(rng);
      CHECK(pa_mpjpe_mm(a, t.apply(a)) < 1e-9);
    }
  }

  SUBCASE("world metric equals plain metric for root-centered inputs") {
    Points3 a = random_cloud(rng, 9);
    Points3 b = random_cloud(rng, 9);
    a.rowwise() -= a.row(0);
    b.rowwise() -= b.row(0);
    CHECK(w_mpjpe_mm(a, b) == mpjpe_mm(a, b));
  }

  SUBCASE("joint relabeling applied to both arguments is invariant") {
    const Points3 a = random_cloud(rng, 8);
    const Points3 b = random_cloud(rng, 8);
    std::vector<int> perm{3, 1, 7, 0, 5, 2, 6, 4};
    Points3 ap(8, 3), bp(8, 3);
    for (int i = 0; i < 8; ++i) {
      ap.row(i) = a.row(perm[i]);
      bp.row(i) = b.row(perm[i]);
    }
    CHECK(mpjpe_mm(ap, bp) == doctest::Approx(mpjpe_mm(a, b)).epsilon(1e-12));
    CHECK(pa_mpjpe_mm(ap, bp) == doctest::Approx(pa_mpjpe_mm(a, b)).epsilon(1e-9));
  }

  SUBCASE("count mismatch is rejected") {
    CHECK_THROWS_AS(mpjpe_mm(random_cloud(rng, 5), random_cloud(rng, 6)), ValidationError);
  }
}

TEST_CASE("wpve shifts by root offset") {
  Rng rng(9);
  const Points3 verts = random_cloud(rng, 50);
  Points3 moved = verts;
  moved.rowwise() += Eigen::RowVector3d(0.1, -0.2, 0.05);
  const Eigen::Vector3d pred_root(0.1, -0.2, 0.05);
  const Eigen::Vector3d gt_root(0.0, 0.0, 0.0);
  CHECK(wpve_mm(moved, verts, pred_root, gt_root) < 1e-9);
}
