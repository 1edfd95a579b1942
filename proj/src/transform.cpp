#include "camworld/transform.hpp"

#include "camworld/camera.hpp"
#include "camworld/errors.hpp"
#include "camworld/rotation.hpp"

namespace camworld {

namespace {

BodyParams rotate_params(const BodyParams& params, const Eigen::Matrix3d& r) {
  if (params.pose.empty()) throw ValidationError("params have no pose entries");
  BodyParams out = params;
  out.pose[0] = matrix_to_axis_angle(r * axis_angle_to_matrix(params.pose[0]));
  out.translation = r * params.translation;
  return out;
}

}  // namespace

BodyParams camera_to_world(const BodyParams& params_cam, double pitch) {
  if (pitch == 0.0) return params_cam;
  return rotate_params(params_cam, pitch_rotation(pitch).transpose());
}

BodyParams world_to_camera(const BodyParams& params_world, double pitch) {
  if (pitch == 0.0) return params_world;
  return rotate_params(params_world, pitch_rotation(pitch));
}

Mesh transform_mesh(const Mesh& mesh, double pitch, Direction direction) {
  Eigen::Matrix3d r = pitch_rotation(pitch);
  if (direction == Direction::kCameraToWorld) r.transposeInPlace();
  Mesh out;
  out.faces = mesh.faces;
  out.vertices = mesh.vertices * r.transpose();
  out.joints = mesh.joints * r.transpose();
  return out;
}

}  // namespace camworld
