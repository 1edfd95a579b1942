#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "camworld/body_model.hpp"
#include "camworld/camera.hpp"
#include "camworld/losses.hpp"
#include "camworld/rasterizer.hpp"
#include "camworld/types.hpp"

namespace camworld {

struct FitConfig {
  int max_iters = 500;
  double grad_tol = 1e-8;       // stop when the gradient norm drops below this
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  double init_step = 0.0;       // 0 = auto-scale from the first gradient
  double min_step = 1e-14;      // below this the line search reports a stall
  double pitch_grid_min = deg_to_rad(-60.0);
  double pitch_grid_max = deg_to_rad(60.0);
  double pitch_grid_step = deg_to_rad(0.5);
  double pitch_refine_tol = 1e-4;  // radians, golden-section bracket width
  LossWeights weights;
  std::uint64_t seed = 0;
};

void validate_config(const FitConfig& cfg);

struct FitReport {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  int iterations = 0;
  LossBreakdown breakdown;
  bool converged = false;
  std::string status;               // "converged" | "max_iters" | "stalled"
  std::vector<double> loss_trace;   // accepted-iterate losses, starting at init
};

struct PitchEstimate {
  double pitch = 0.0;
  Eigen::Vector3d t_b = Eigen::Vector3d::Zero();
  FitReport report;
};

/// Pitch-restricted resectioning: grid over candidate pitch with a linear
/// least-squares body offset per candidate (point-to-ray residuals), scored by
/// exact reprojection error, then golden-section refinement around the best
/// grid node.
PitchEstimate estimate_pitch(const Points3& joints_world, const Points2& keypoints2d,
                             const Intrinsics& intr, const FitConfig& cfg);

struct PitchDepthEstimate {
  double pitch = 0.0;
  FitReport report;
};

/// Grid search on pitch scoring mean absolute depth difference between the
/// observed map and a re-render of the world-frame hypothesis mesh. Ties break
/// toward smaller |pitch|. No sub-grid refinement.
PitchDepthEstimate estimate_pitch_depth(const DepthMap& observed, const Mesh& world_mesh,
                                        const Intrinsics& intr, const Eigen::Vector3d& t_b,
                                        const FitConfig& cfg);

struct AdjustResult {
  BodyParams params_world;
  FitReport report;
};

/// World-frame refinement: gradient descent with Armijo backtracking on the
/// total loss over (pose, shape, translation), starting from
/// camera_to_world(init_cam, pitch). Loss never increases across accepted
/// iterations.
AdjustResult adjust_mesh(const BodyModelSpec& spec, const BodyParams& init_cam, double pitch,
                         const Intrinsics& intr, const Eigen::Vector3d& t_b,
                         const FitTargets& targets, const FitConfig& cfg);

}  // namespace camworld
