#pragma once

#include <vector>

#include "camworld/body_model.hpp"
#include "camworld/camera.hpp"
#include "camworld/losses.hpp"
#include "camworld/rng.hpp"
#include "camworld/rotation.hpp"
#include "camworld/transform.hpp"
#include "camworld/types.hpp"

namespace camworld::testing {

/// Random body params with bounded pose magnitudes (root included), shape
/// within [-lim, lim] and a translation in a generic box.
inline BodyParams random_params(Rng& rng, int joint_count, double pose_lim = 1.0,
                                double shape_lim = 0.5) {
  BodyParams p = zero_params(joint_count);
  for (int k = 0; k < joint_count; ++k) {
    for (int c = 0; c < 3; ++c) p.pose[k][c] = rng.uniform(-pose_lim, pose_lim);
  }
  for (int i = 0; i < kShapeDims; ++i) p.shape[i] = rng.uniform(-shape_lim, shape_lim);
  p.translation = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  return p;
}

// Noiseless synthetic refinement problem: upright world body in front of an
// origin camera at a known pitch, full supervision, and a camera-frame init
// perturbed away from the truth.
struct FitScenario {
  Intrinsics intr;
  double pitch = 0.0;
  Eigen::Vector3d t_b = Eigen::Vector3d::Zero();
  BodyParams gt_world;
  FitTargets targets;
  BodyParams init_cam;
};

inline FitScenario make_fit_scenario(const BodyModelSpec& spec, std::uint64_t seed,
                                     double root_err_deg, double pose_sigma,
                                     double pitch_min_deg = -40.0, double pitch_max_deg = 40.0) {
  Rng rng(mix_seed(0x66697473ULL, seed));
  FitScenario s;
  s.intr = intrinsics_from_fov(640, 480, default_fov_rad());
  s.pitch = rng.uniform(deg_to_rad(pitch_min_deg), deg_to_rad(pitch_max_deg));

  s.gt_world = zero_params(spec.joint_count());
  for (size_t k = 1; k < s.gt_world.pose.size(); ++k) {
    for (int c = 0; c < 3; ++c) {
      s.gt_world.pose[k][c] = std::clamp(0.2 * rng.normal(), -0.8, 0.8);
    }
  }
  for (int i = 0; i < kShapeDims; ++i) s.gt_world.shape[i] = rng.uniform(-0.5, 0.5);
  s.gt_world.translation =
      pitch_rotation(s.pitch).transpose() *
      Eigen::Vector3d(rng.uniform(-0.4, 0.4), rng.uniform(-0.3, 0.3), rng.uniform(2.5, 4.5));

  const Mesh mesh = lbs_forward(spec, s.gt_world);
  Extrinsics ext;
  ext.pitch = s.pitch;
  s.targets.keypoints2d = project(mesh.joints, s.intr, ext, s.t_b);
  s.targets.joints3d = mesh.joints;
  s.targets.vertices = mesh.vertices;
  s.targets.pose = s.gt_world.pose;

  s.init_cam = world_to_camera(s.gt_world, s.pitch);
  Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
  axis.normalize();
  const Eigen::Matrix3d bump = axis_angle_to_matrix(deg_to_rad(root_err_deg) * axis);
  s.init_cam.pose[0] =
      matrix_to_axis_angle(bump * axis_angle_to_matrix(s.init_cam.pose[0]));
  for (size_t k = 1; k < s.init_cam.pose.size(); ++k) {
    for (int c = 0; c < 3; ++c) s.init_cam.pose[k][c] += pose_sigma * rng.normal();
  }
  return s;
}

}  // namespace camworld::testing
