#pragma once

#include <Eigen/Core>

#include "camworld/types.hpp"

namespace camworld {

// Similarity transform x -> scale * rotation * x + translation.
struct SimilarityTransform {
  double scale = 1.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Points3 apply(const Points3& points) const;
  SimilarityTransform inverse() const;
};

/// Least-squares similarity alignment of source onto target (Umeyama),
/// reflection excluded. Throws ValidationError for rank-deficient sources.
SimilarityTransform procrustes_align(const Points3& source, const Points3& target);

// Inputs are meters; results are millimeters.
double mpjpe_mm(const Points3& pred, const Points3& gt);
double pve_mm(const Points3& pred_verts, const Points3& gt_verts);
double pa_mpjpe_mm(const Points3& pred, const Points3& gt);

/// World-frame error after aligning root positions (translation only, no
/// rotation), so orientation error is measured instead of absolute depth.
double w_mpjpe_mm(const Points3& pred_world, const Points3& gt_world, int root_index = 0);
double wpve_mm(const Points3& pred_verts, const Points3& gt_verts,
               const Eigen::Vector3d& pred_root, const Eigen::Vector3d& gt_root);

}  // namespace camworld
