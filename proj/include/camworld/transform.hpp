#pragma once

#include "camworld/body_model.hpp"

namespace camworld {

enum class Direction { kCameraToWorld, kWorldToCamera };

// Parameter-level frame change under camera pitch: the root orientation is
// left-composed with R(pitch)^T (or R(pitch)), the translation rotated the
// same way; body pose and shape pass through unchanged.
BodyParams camera_to_world(const BodyParams& params_cam, double pitch);
BodyParams world_to_camera(const BodyParams& params_world, double pitch);

/// Vertex-level counterpart: rigid rotation of all vertices and joints about
/// the origin. Faces are unchanged.
Mesh transform_mesh(const Mesh& mesh, double pitch, Direction direction);

}  // namespace camworld
