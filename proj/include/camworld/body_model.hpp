#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "camworld/types.hpp"

namespace camworld {

inline constexpr int kShapeDims = 10;

// Skinned parametric body: template mesh, kinematic tree, joint regressor,
// blend weights and shape blendshapes. Immutable after load; safe to share.
struct BodyModelSpec {
  Points3 template_vertices;               // N x 3, meters
  std::vector<std::array<int, 3>> faces;
  Eigen::MatrixXd joint_regressor;         // J x N, rows sum to 1
  std::vector<int> parents;                // J entries, root is -1
  Eigen::MatrixXd skinning_weights;        // N x J, rows non-negative, sum to 1
  std::vector<Points3> shape_blendshapes;  // kShapeDims entries, each N x 3

  // Accepted and round-tripped so full SMPL exports load; lbs_forward does
  // not apply them.
  std::optional<std::vector<Points3>> pose_blendshapes;

  int vertex_count() const { return static_cast<int>(template_vertices.rows()); }
  int joint_count() const { return static_cast<int>(parents.size()); }
};

/// Throws ValidationError naming the first violated invariant.
void validate_spec(const BodyModelSpec& spec);

struct BodyParams {
  std::vector<Eigen::Vector3d> pose;  // per-joint axis-angle, radians; pose[0] is the root
  Eigen::VectorXd shape;              // kShapeDims coefficients
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();  // meters
};

/// Checks sizes against joint_count and wraps axis-angle magnitudes into [0, 2*pi).
BodyParams make_body_params(std::vector<Eigen::Vector3d> pose, Eigen::VectorXd shape,
                            const Eigen::Vector3d& translation, int joint_count);

BodyParams zero_params(int joint_count);

struct Mesh {
  Points3 vertices;  // N x 3
  std::vector<std::array<int, 3>> faces;
  Points3 joints;  // J x 3
};

/// Rest joints J(beta) regressed from the shaped template.
Points3 rest_joints(const BodyModelSpec& spec, const Eigen::VectorXd& shape);

/// Shape blendshapes -> rest joints -> kinematic chain -> skinning -> translation.
Mesh lbs_forward(const BodyModelSpec& spec, const BodyParams& params);

inline int lbs_param_count(int joint_count) { return 3 * joint_count + kShapeDims + 3; }

// Forward pass plus derivatives with respect to the packed parameter vector
// [pose (3J), shape (10), translation (3)].
struct LbsResult {
  Mesh mesh;
  Eigen::MatrixXd d_vertices;  // (3N) x P, row 3*v + coord
  Eigen::MatrixXd d_joints;    // (3J) x P
};

LbsResult lbs_forward_with_jacobian(const BodyModelSpec& spec, const BodyParams& params);

// Deterministic 8-joint capsule body used throughout tests and synthetic data.
// Rest root joint sits at the world origin; blendshapes never move it.
BodyModelSpec toy_body_spec();

BodyModelSpec load_body_spec(const std::string& path);
void save_body_spec(const BodyModelSpec& spec, const std::string& path);

// Wavefront OBJ, vertices then 1-indexed faces. read_obj leaves joints empty.
void write_obj(const Mesh& mesh, const std::string& path);
Mesh read_obj(const std::string& path);

}  // namespace camworld
