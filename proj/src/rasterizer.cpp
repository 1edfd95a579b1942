#include "camworld/rasterizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <Eigen/Geometry>

#include "camworld/errors.hpp"

namespace camworld {

DepthMap::DepthMap(int w, int h) : width(w), height(h) {
  if (w < 1 || h < 1) {
    throw ValidationError("depth map dimensions must be >= 1, got " + std::to_string(w) + "x" +
                          std::to_string(h));
  }
  depth.assign(static_cast<size_t>(w) * h, kBackground);
}

int DepthMap::covered_count() const {
  int n = 0;
  for (double d : depth) {
    if (std::isfinite(d)) ++n;
  }
  return n;
}

namespace {

struct ScreenVertex {
  double x, y;    // pixel coordinates
  double inv_z;   // 1 / camera z
};

double edge(double ax, double ay, double bx, double by, double px, double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

// Tie rule for points exactly on an edge; matches at most one of the two
// triangles sharing it.
bool top_left(double ex, double ey) { return ey > 0.0 || (ey == 0.0 && ex < 0.0); }

bool covers(double w, double ax, double ay, double bx, double by) {
  if (w > 0.0) return true;
  if (w < 0.0) return false;
  return top_left(bx - ax, by - ay);
}

struct CameraTriangle {
  Eigen::Vector3d v0, v1, v2;  // camera frame, all z > kNearClip
};

std::vector<CameraTriangle> clip_triangles(const Mesh& mesh, const Eigen::Matrix3d& r,
                                           const Eigen::Vector3d& t_b) {
  std::vector<CameraTriangle> out;
  out.reserve(mesh.faces.size());
  Points3 cam(mesh.vertices.rows(), 3);
  for (Eigen::Index i = 0; i < mesh.vertices.rows(); ++i) {
    cam.row(i) = to_camera_frame(mesh.vertices.row(i), r, t_b);
  }
  for (const auto& f : mesh.faces) {
    const Eigen::Vector3d a = cam.row(f[0]);
    const Eigen::Vector3d b = cam.row(f[1]);
    const Eigen::Vector3d c = cam.row(f[2]);
    if (a.z() <= kNearClip || b.z() <= kNearClip || c.z() <= kNearClip) continue;
    out.push_back({a, b, c});
  }
  return out;
}

}  // namespace

DepthMap render_depth(const Mesh& mesh, const Intrinsics& intr, const Extrinsics& ext,
                      const Eigen::Vector3d& t_b) {
  DepthMap map(intr.width, intr.height);
  const Eigen::Matrix3d r = rotation(ext);
  const auto tris = clip_triangles(mesh, r, t_b);

  for (const auto& tri : tris) {
    ScreenVertex s[3];
    const Eigen::Vector3d* v[3] = {&tri.v0, &tri.v1, &tri.v2};
    for (int i = 0; i < 3; ++i) {
      s[i].x = intr.focal * v[i]->x() / v[i]->z() + intr.cx();
      s[i].y = intr.focal * v[i]->y() / v[i]->z() + intr.cy();
      s[i].inv_z = 1.0 / v[i]->z();
    }
    double area2 = edge(s[0].x, s[0].y, s[1].x, s[1].y, s[2].x, s[2].y);
    if (area2 == 0.0) continue;
    if (area2 < 0.0) {
      std::swap(s[1], s[2]);
      area2 = -area2;
    }

    const double min_x = std::min({s[0].x, s[1].x, s[2].x});
    const double max_x = std::max({s[0].x, s[1].x, s[2].x});
    const double min_y = std::min({s[0].y, s[1].y, s[2].y});
    const double max_y = std::max({s[0].y, s[1].y, s[2].y});
    const int px0 = std::max(0, static_cast<int>(std::ceil(min_x - 0.5)));
    const int px1 = std::min(intr.width - 1, static_cast<int>(std::floor(max_x - 0.5)));
    const int py0 = std::max(0, static_cast<int>(std::ceil(min_y - 0.5)));
    const int py1 = std::min(intr.height - 1, static_cast<int>(std::floor(max_y - 0.5)));

    for (int py = py0; py <= py1; ++py) {
      const double cy = py + 0.5;
      for (int px = px0; px <= px1; ++px) {
        const double cx = px + 0.5;
        const double w0 = edge(s[1].x, s[1].y, s[2].x, s[2].y, cx, cy);
        const double w1 = edge(s[2].x, s[2].y, s[0].x, s[0].y, cx, cy);
        const double w2 = edge(s[0].x, s[0].y, s[1].x, s[1].y, cx, cy);
        if (!covers(w0, s[1].x, s[1].y, s[2].x, s[2].y)) continue;
        if (!covers(w1, s[2].x, s[2].y, s[0].x, s[0].y)) continue;
        if (!covers(w2, s[0].x, s[0].y, s[1].x, s[1].y)) continue;
        const double inv_z = (w0 * s[0].inv_z + w1 * s[1].inv_z + w2 * s[2].inv_z) / area2;
        if (inv_z <= 0.0) continue;
        const double z = 1.0 / inv_z;
        double& cell = map.at(px, py);
        if (z < cell) cell = z;
      }
    }
  }
  return map;
}

DepthMap render_depth_oracle(const Mesh& mesh, const Intrinsics& intr, const Extrinsics& ext,
                             const Eigen::Vector3d& t_b) {
  DepthMap map(intr.width, intr.height);
  const Eigen::Matrix3d r = rotation(ext);
  const auto tris = clip_triangles(mesh, r, t_b);

  for (int py = 0; py < intr.height; ++py) {
    for (int px = 0; px < intr.width; ++px) {
      const Eigen::Vector3d dir((px + 0.5 - intr.cx()) / intr.focal,
                                (py + 0.5 - intr.cy()) / intr.focal, 1.0);
      double best = DepthMap::kBackground;
      for (const auto& tri : tris) {
        // Moller-Trumbore, ray origin at the camera. dir.z == 1 so the ray
        // parameter equals camera z.
        const Eigen::Vector3d e1 = tri.v1 - tri.v0;
        const Eigen::Vector3d e2 = tri.v2 - tri.v0;
        const Eigen::Vector3d h = dir.cross(e2);
        const double det = e1.dot(h);
        if (det == 0.0) continue;
        const double inv_det = 1.0 / det;
        const Eigen::Vector3d sv = -tri.v0;
        const double u = sv.dot(h) * inv_det;
        if (u < 0.0 || u > 1.0) continue;
        const Eigen::Vector3d q = sv.cross(e1);
        const double v = dir.dot(q) * inv_det;
        if (v < 0.0 || u + v > 1.0) continue;
        const double t = e2.dot(q) * inv_det;
        if (t > 0.0 && t < best) best = t;
      }
      map.at(px, py) = best;
    }
  }
  return map;
}

DepthMap crop_resize_depth(const DepthMap& d, const BBox& bbox, int out_size) {
  if (out_size < 1) throw ValidationError("crop output size must be >= 1");
  if (!(bbox.b > 0.0)) throw ValidationError("crop bbox size must be positive");
  const double x0 = bbox.cx + d.width / 2.0 - bbox.b / 2.0;
  const double y0 = bbox.cy + d.height / 2.0 - bbox.b / 2.0;
  if (x0 + bbox.b <= 0.0 || x0 >= d.width || y0 + bbox.b <= 0.0 || y0 >= d.height) {
    throw ValidationError("crop bbox does not overlap the image");
  }
  DepthMap out(out_size, out_size);
  const double step = bbox.b / out_size;
  for (int i = 0; i < out_size; ++i) {
    const int sy = static_cast<int>(std::floor(y0 + (i + 0.5) * step));
    for (int j = 0; j < out_size; ++j) {
      const int sx = static_cast<int>(std::floor(x0 + (j + 0.5) * step));
      if (sx >= 0 && sx < d.width && sy >= 0 && sy < d.height) {
        out.at(j, i) = d.at(sx, sy);
      }
    }
  }
  return out;
}

void write_pfm(const DepthMap& d, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "Pf\n" << d.width << " " << d.height << "\n-1.0\n";
  std::vector<float> row(d.width);
  for (int y = d.height - 1; y >= 0; --y) {  // PFM rows run bottom-up
    for (int x = 0; x < d.width; ++x) row[x] = static_cast<float>(d.at(x, y));
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw IoError("failed writing " + path);
}

DepthMap read_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string magic;
  int w = 0, h = 0;
  double scale = 0.0;
  in >> magic >> w >> h >> scale;
  if (!in || magic != "Pf") throw SchemaError(path + ": not a single-channel PFM");
  if (w < 1 || h < 1) throw SchemaError(path + ": bad dimensions");
  if (scale >= 0.0) throw SchemaError(path + ": big-endian PFM not supported");
  in.get();  // single whitespace after the scale line
  DepthMap d(w, h);
  std::vector<float> row(w);
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!in) throw SchemaError(path + ": truncated pixel data");
    for (int x = 0; x < w; ++x) d.at(x, y) = row[x];
  }
  return d;
}

}  // namespace camworld
