#include "camworld/metrics.hpp"

#include <string>

#include <Eigen/Dense>

#include "camworld/errors.hpp"

namespace camworld {

namespace {

void check_same_shape(const Points3& a, const Points3& b, const char* what) {
  if (a.rows() != b.rows()) {
    throw ValidationError(std::string(what) + ": point counts differ (" +
                          std::to_string(a.rows()) + " vs " + std::to_string(b.rows()) + ")");
  }
  if (a.rows() == 0) throw ValidationError(std::string(what) + ": empty point sets");
}

double mean_distance_mm(const Points3& a, const Points3& b) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    sum += (a.row(i) - b.row(i)).norm();
  }
  return 1000.0 * sum / static_cast<double>(a.rows());
}

}  // namespace

Points3 SimilarityTransform::apply(const Points3& points) const {
  Points3 out = scale * (points * rotation.transpose());
  out.rowwise() += translation.transpose();
  return out;
}

SimilarityTransform SimilarityTransform::inverse() const {
  SimilarityTransform inv;
  inv.scale = 1.0 / scale;
  inv.rotation = rotation.transpose();
  inv.translation = -inv.scale * (inv.rotation * translation);
  return inv;
}

SimilarityTransform procrustes_align(const Points3& source, const Points3& target) {
  check_same_shape(source, target, "procrustes_align");
  const Eigen::Index k = source.rows();
  if (k < 3) throw ValidationError("procrustes_align needs at least 3 points");

  const Eigen::RowVector3d mu_s = source.colwise().mean();
  const Eigen::RowVector3d mu_t = target.colwise().mean();
  const Points3 xs = source.rowwise() - mu_s;
  const Points3 xt = target.rowwise() - mu_t;

  const double var_s = xs.squaredNorm() / static_cast<double>(k);
  const Eigen::Matrix3d cov = (xt.transpose() * xs) / static_cast<double>(k);

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();

  // A collinear (or coincident) source leaves the rotation underdetermined.
  Eigen::JacobiSVD<Points3> src_svd(xs);
  const auto src_sv = src_svd.singularValues();
  if (src_sv(0) <= 0.0 || src_sv(1) <= 1e-9 * src_sv(0)) {
    throw ValidationError("procrustes_align: source points are rank-deficient");
  }

  Eigen::Vector3d sign_fix = Eigen::Vector3d::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) sign_fix(2) = -1.0;

  SimilarityTransform t;
  t.rotation = svd.matrixU() * sign_fix.asDiagonal() * svd.matrixV().transpose();
  t.scale = sv.dot(sign_fix) / var_s;
  t.translation = mu_t.transpose() - t.scale * (t.rotation * mu_s.transpose());
  return t;
}

double mpjpe_mm(const Points3& pred, const Points3& gt) {
  check_same_shape(pred, gt, "mpjpe");
  return mean_distance_mm(pred, gt);
}

double pve_mm(const Points3& pred_verts, const Points3& gt_verts) {
  check_same_shape(pred_verts, gt_verts, "pve");
  return mean_distance_mm(pred_verts, gt_verts);
}

double pa_mpjpe_mm(const Points3& pred, const Points3& gt) {
  const SimilarityTransform t = procrustes_align(pred, gt);
  return mean_distance_mm(t.apply(pred), gt);
}

double w_mpjpe_mm(const Points3& pred_world, const Points3& gt_world, int root_index) {
  check_same_shape(pred_world, gt_world, "w_mpjpe");
  if (root_index < 0 || root_index >= pred_world.rows()) {
    throw ValidationError("w_mpjpe: root index out of range");
  }
  Points3 shifted = pred_world;
  shifted.rowwise() += (gt_world.row(root_index) - pred_world.row(root_index));
  return mean_distance_mm(shifted, gt_world);
}

double wpve_mm(const Points3& pred_verts, const Points3& gt_verts,
               const Eigen::Vector3d& pred_root, const Eigen::Vector3d& gt_root) {
  check_same_shape(pred_verts, gt_verts, "wpve");
  Points3 shifted = pred_verts;
  shifted.rowwise() += (gt_root - pred_root).transpose();
  return mean_distance_mm(shifted, gt_verts);
}

}  // namespace camworld
