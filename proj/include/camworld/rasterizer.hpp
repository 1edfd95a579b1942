#pragma once

#include <limits>
#include <string>
#include <vector>

#include "camworld/body_model.hpp"
#include "camworld/camera.hpp"

namespace camworld {

// Per-pixel camera-frame z of the nearest surface; background is +infinity.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> depth;  // row-major

  static constexpr double kBackground = std::numeric_limits<double>::infinity();

  DepthMap() = default;
  DepthMap(int w, int h);

  double& at(int x, int y) { return depth[static_cast<size_t>(y) * width + x]; }
  double at(int x, int y) const { return depth[static_cast<size_t>(y) * width + x]; }
  bool covered(int x, int y) const { return std::isfinite(at(x, y)); }
  int covered_count() const;
};

// Triangles with any vertex at camera z <= this are dropped whole.
inline constexpr double kNearClip = 1e-3;

/// Z-buffer rasterization: pixel-center sampling, top-left tie rule,
/// perspective-correct z (1/z interpolated barycentrically).
DepthMap render_depth(const Mesh& mesh, const Intrinsics& intr, const Extrinsics& ext,
                      const Eigen::Vector3d& t_b);

/// Brute-force per-pixel ray casting over all triangles; same clipping rule.
/// Test oracle for render_depth; do not use in production paths.
DepthMap render_depth_oracle(const Mesh& mesh, const Intrinsics& intr, const Extrinsics& ext,
                             const Eigen::Vector3d& t_b);

/// Nearest-neighbor resample of the square crop; background preserved and
/// used for source pixels outside the image.
DepthMap crop_resize_depth(const DepthMap& d, const BBox& bbox, int out_size = 256);

// Single-channel PFM (little-endian float32, bottom-up rows). Background
// stored as +inf.
void write_pfm(const DepthMap& d, const std::string& path);
DepthMap read_pfm(const std::string& path);

}  // namespace camworld
