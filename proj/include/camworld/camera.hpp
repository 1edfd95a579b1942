#pragma once

#include <optional>

#include <Eigen/Core>

#include "camworld/types.hpp"

namespace camworld {

// Pinhole intrinsics with the principal point fixed at the image center.
struct Intrinsics {
  double focal = 0.0;  // pixels
  int width = 0;
  int height = 0;

  double cx() const { return width / 2.0; }
  double cy() const { return height / 2.0; }
};

/// Diagonal length sqrt(W^2 + H^2), which also normalizes bbox encodings.
double image_diagonal(int width, int height);

/// focal = diagonal / (2 tan(fov/2)). fov is the diagonal field of view.
Intrinsics intrinsics_from_fov(int width, int height, double fov_diag_rad);

/// The diagonal fov at which focal equals the image diagonal: 2*atan(1/2).
double default_fov_rad();

// World-to-camera rotation as pitch/roll/yaw plus the camera's world position.
// Positive pitch tilts the camera downward; image y grows downward.
struct Extrinsics {
  double pitch = 0.0;  // radians, about camera x
  double roll = 0.0;   // radians, about camera z
  double yaw = 0.0;    // radians, about camera y
  Eigen::Vector3d camera_center = Eigen::Vector3d::Zero();  // world frame, meters
};

/// [1 0 0; 0 cos p -sin p; 0 sin p cos p] -- the only factor used at inference.
Eigen::Matrix3d pitch_rotation(double pitch);

/// R = R_pitch * R_roll * R_yaw (camera-axis intrinsic order).
Eigen::Matrix3d rotation_from_euler(double pitch, double roll, double yaw);

inline Eigen::Matrix3d rotation(const Extrinsics& e) {
  return rotation_from_euler(e.pitch, e.roll, e.yaw);
}

// Points with camera-frame z at or below this are treated as behind the camera.
inline constexpr double kMinViewDepth = 1e-6;

/// Camera-frame coordinates p_c = R * x_world - t_b.
inline Eigen::Vector3d to_camera_frame(const Eigen::Vector3d& x_world,
                                       const Eigen::Matrix3d& r,
                                       const Eigen::Vector3d& t_b) {
  return r * x_world - t_b;
}

/// Projects one world point; empty when the point is at or behind the camera.
std::optional<Eigen::Vector2d> try_project_point(const Eigen::Vector3d& x_world,
                                                 const Intrinsics& intr,
                                                 const Eigen::Matrix3d& r,
                                                 const Eigen::Vector3d& t_b);

/// Projects a point set; throws CameraError naming the first failing point.
Points2 project(const Points3& world_points, const Intrinsics& intr, const Extrinsics& ext,
                const Eigen::Vector3d& t_b);

// Person-box location within the full image. Components are (c_x/f, c_y/f, b/f)
// with f the image diagonal and (c_x, c_y) relative to the image center.
struct BBoxEncoding {
  double cx_norm = 0.0;
  double cy_norm = 0.0;
  double b_norm = 0.0;
};

/// Square person box: center relative to the image center, side length b. Pixels.
struct BBox {
  double cx = 0.0;
  double cy = 0.0;
  double b = 0.0;
};

BBoxEncoding bbox_encode(double cx, double cy, double b, int width, int height);
inline BBoxEncoding bbox_encode(const BBox& box, int width, int height) {
  return bbox_encode(box.cx, box.cy, box.b, width, height);
}

/// Tight square box around projected points; side floored at 1 px.
BBox bbox_from_projection(const Points2& points, int width, int height);

}  // namespace camworld
