#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "camworld/body_model.hpp"
#include "camworld/camera.hpp"

namespace camworld {

struct LossWeights {
  double l2d = 1.0;
  double l3d = 1.0;
  double lv = 1.0;
  double lmix = 1.0;
  double lroot = 2.0;  // hybrid-loss root weight; ablation optimum
  double lalpha = 1.0;
  double lgamma = 1.0;
};

void validate_weights(const LossWeights& w);

/// Camera-angle loss: lalpha*(pred_pitch-gt_pitch)^2 + lgamma*(pred_roll-gt_roll)^2.
double loss_cam(double pred_pitch, double pred_roll, double gt_pitch, double gt_roll,
                const LossWeights& w);

// Mean over points of squared Euclidean distance.
double loss_3d(const Points3& pred_joints, const Points3& gt_joints);
double loss_vertex(const Points3& pred_verts, const Points3& gt_verts);

/// Mean over joints of squared pixel error after projecting world-frame
/// joints under the pitch camera. Throws CameraError for behind-camera joints.
double loss_2d(const Points3& pred_joints_world, const Points2& gt_keypoints,
               const Intrinsics& intr, double pitch, const Eigen::Vector3d& t_b);

/// Pose hybrid loss: lroot*|pose_root - gt_root|^2 + |pose - gt_pose|^2, plain
/// squared norms with the root included in the second term.
double loss_mix(const std::vector<Eigen::Vector3d>& pred_pose,
                const std::vector<Eigen::Vector3d>& gt_pose, double lroot);

// Supervision available to the total loss. keypoints2d is required; the other
// terms contribute only when present.
struct FitTargets {
  Points2 keypoints2d;
  std::optional<Points3> joints3d;   // world frame, meters
  std::optional<Points3> vertices;   // world frame, meters
  std::optional<std::vector<Eigen::Vector3d>> pose;  // world-frame gt pose
};

struct LossBreakdown {
  double total = 0.0;
  double l2d = 0.0;
  double l3d = 0.0;
  double lv = 0.0;
  double lmix = 0.0;
};

/// Weighted sum of the active terms for a world-frame body hypothesis.
LossBreakdown loss_total(const BodyModelSpec& spec, const BodyParams& params_world, double pitch,
                         const Eigen::Vector3d& t_b, const Intrinsics& intr,
                         const FitTargets& targets, const LossWeights& w);

/// Same value plus d total / d [pose (3J), shape (10), translation (3)].
std::pair<LossBreakdown, Eigen::VectorXd> grad_loss_total(
    const BodyModelSpec& spec, const BodyParams& params_world, double pitch,
    const Eigen::Vector3d& t_b, const Intrinsics& intr, const FitTargets& targets,
    const LossWeights& w);

// Gradient evaluation plus the Gauss-Newton approximation of the Hessian,
// which the optimizer uses to precondition descent directions (the 2D term is
// in squared pixels, the 3D terms in squared meters; unscaled descent crawls).
struct LossGradient {
  LossBreakdown breakdown;
  Eigen::VectorXd grad;
  Eigen::MatrixXd gn;  // P x P, positive semi-definite
};

LossGradient loss_gradient(const BodyModelSpec& spec, const BodyParams& params_world,
                           double pitch, const Eigen::Vector3d& t_b, const Intrinsics& intr,
                           const FitTargets& targets, const LossWeights& w);

// Packing helpers shared with the fitting module.
Eigen::VectorXd pack_params(const BodyParams& params);
BodyParams unpack_params(const Eigen::VectorXd& x, int joint_count);

}  // namespace camworld
