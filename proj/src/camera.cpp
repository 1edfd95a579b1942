#include "camworld/camera.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "camworld/errors.hpp"

namespace camworld {

double image_diagonal(int width, int height) {
  return std::sqrt(static_cast<double>(width) * width + static_cast<double>(height) * height);
}

double default_fov_rad() { return 2.0 * std::atan(0.5); }

Intrinsics intrinsics_from_fov(int width, int height, double fov_diag_rad) {
  if (width < 1 || height < 1) {
    throw ValidationError("image dimensions must be >= 1, got " + std::to_string(width) + "x" +
                          std::to_string(height));
  }
  if (!(fov_diag_rad > 0.0) || !(fov_diag_rad < std::numbers::pi)) {
    throw ValidationError("diagonal fov must lie in (0, pi), got " +
                          std::to_string(fov_diag_rad));
  }
  Intrinsics intr;
  intr.width = width;
  intr.height = height;
  intr.focal = image_diagonal(width, height) / (2.0 * std::tan(fov_diag_rad / 2.0));
  return intr;
}

Eigen::Matrix3d pitch_rotation(double pitch) {
  const double c = std::cos(pitch);
  const double s = std::sin(pitch);
  Eigen::Matrix3d r;
  r << 1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c;
  return r;
}

Eigen::Matrix3d rotation_from_euler(double pitch, double roll, double yaw) {
  const double cr = std::cos(roll), sr = std::sin(roll);
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  Eigen::Matrix3d r_roll;
  r_roll << cr, -sr, 0.0, sr, cr, 0.0, 0.0, 0.0, 1.0;
  Eigen::Matrix3d r_yaw;
  r_yaw << cy, 0.0, sy, 0.0, 1.0, 0.0, -sy, 0.0, cy;
  return pitch_rotation(pitch) * r_roll * r_yaw;
}

std::optional<Eigen::Vector2d> try_project_point(const Eigen::Vector3d& x_world,
                                                 const Intrinsics& intr,
                                                 const Eigen::Matrix3d& r,
                                                 const Eigen::Vector3d& t_b) {
  const Eigen::Vector3d p = to_camera_frame(x_world, r, t_b);
  if (!(p.z() > kMinViewDepth)) return std::nullopt;
  return Eigen::Vector2d(intr.focal * p.x() / p.z() + intr.cx(),
                         intr.focal * p.y() / p.z() + intr.cy());
}

Points2 project(const Points3& world_points, const Intrinsics& intr, const Extrinsics& ext,
                const Eigen::Vector3d& t_b) {
  const Eigen::Matrix3d r = rotation(ext);
  Points2 out(world_points.rows(), 2);
  for (Eigen::Index i = 0; i < world_points.rows(); ++i) {
    const auto px = try_project_point(world_points.row(i), intr, r, t_b);
    if (!px) {
      throw CameraError("point " + std::to_string(i) + " is at or behind the camera plane");
    }
    out.row(i) = *px;
  }
  return out;
}

BBoxEncoding bbox_encode(double cx, double cy, double b, int width, int height) {
  if (!(b > 0.0)) {
    throw ValidationError("bbox size must be positive, got " + std::to_string(b));
  }
  const double f = image_diagonal(width, height);
  return BBoxEncoding{cx / f, cy / f, b / f};
}

BBox bbox_from_projection(const Points2& points, int width, int height) {
  if (points.rows() == 0) throw ValidationError("bbox of an empty point set");
  const double min_x = points.col(0).minCoeff();
  const double max_x = points.col(0).maxCoeff();
  const double min_y = points.col(1).minCoeff();
  const double max_y = points.col(1).maxCoeff();
  BBox box;
  box.cx = 0.5 * (min_x + max_x) - width / 2.0;
  box.cy = 0.5 * (min_y + max_y) - height / 2.0;
  box.b = std::max({max_x - min_x, max_y - min_y, 1.0});
  return box;
}

}  // namespace camworld
