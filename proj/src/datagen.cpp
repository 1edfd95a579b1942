#include "camworld/datagen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "camworld/errors.hpp"
#include "camworld/serialize.hpp"

namespace fs = std::filesystem;

namespace camworld {

void validate_ranges(const SamplerRanges& r) {
  if (!(r.pitch_max >= r.pitch_min) || !(r.roll_max >= r.roll_min) ||
      !(r.yaw_max >= r.yaw_min)) {
    throw ValidationError("sampler angle ranges are not well-ordered");
  }
  if (!(r.dist_min > kNearClip) || !(r.dist_max >= r.dist_min)) {
    throw ValidationError("camera distance range must sit beyond the near plane");
  }
  if (r.aim_offset_max < 0.0) throw ValidationError("aim offset must be non-negative");
  if (!(r.jitter_sigma >= 0.0) || !(r.jitter_clamp >= 0.0)) {
    throw ValidationError("jitter settings must be non-negative");
  }
}

SceneGeometry sample_camera(Rng& rng, const SamplerRanges& ranges) {
  validate_ranges(ranges);
  SceneGeometry g;
  g.extrinsics.pitch = rng.uniform(ranges.pitch_min, ranges.pitch_max);
  g.extrinsics.roll = rng.uniform(ranges.roll_min, ranges.roll_max);
  g.extrinsics.yaw = rng.uniform(ranges.yaw_min, ranges.yaw_max);
  g.extrinsics.camera_center.setZero();
  const double dist = rng.uniform(ranges.dist_min, ranges.dist_max);
  const double ax = rng.uniform(-ranges.aim_offset_max, ranges.aim_offset_max);
  const double ay = rng.uniform(-ranges.aim_offset_max, ranges.aim_offset_max);
  const Eigen::Vector3d view_dir = Eigen::Vector3d(ax, ay, 1.0).normalized();
  g.body_translation = rotation(g.extrinsics).transpose() * (dist * view_dir);
  g.t_b.setZero();
  return g;
}

BodyParams jitter_pose(Rng& rng, const BodyParams& base, double sigma, double clamp) {
  BodyParams out = base;
  for (size_t k = 1; k < out.pose.size(); ++k) {
    for (int c = 0; c < 3; ++c) {
      const double d = std::clamp(sigma * rng.normal(), -clamp, clamp);
      out.pose[k][c] += d;
    }
  }
  return out;
}

int mask_block_count(double ratio) {
  if (!(ratio >= 0.0) || !(ratio <= 1.0)) {
    throw ValidationError("mask ratio must lie in [0, 1]");
  }
  return static_cast<int>(std::nearbyint(ratio * 256.0));  // round-half-even
}

void apply_block_mask(DepthMap& grid, double ratio, std::uint64_t seed) {
  if (grid.width != 256 || grid.height != 256) {
    throw ValidationError("block mask expects a 256x256 grid");
  }
  const int count = mask_block_count(ratio);
  // Partial Fisher-Yates over the 256 block indices.
  std::array<int, 256> blocks;
  for (int i = 0; i < 256; ++i) blocks[i] = i;
  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    const int pick = i + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(256 - i)));
    std::swap(blocks[i], blocks[pick]);
  }
  for (int i = 0; i < count; ++i) {
    const int bx = (blocks[i] % 16) * 16;
    const int by = (blocks[i] / 16) * 16;
    for (int y = by; y < by + 16; ++y) {
      for (int x = bx; x < bx + 16; ++x) grid.at(x, y) = DepthMap::kBackground;
    }
  }
}

SceneRecord generate_record(const BodyModelSpec& spec, const std::string& spec_path,
                            const BodyParams& params_world, const Intrinsics& intr,
                            const Extrinsics& ext, const Eigen::Vector3d& t_b,
                            const std::string& id, const std::string& out_dir,
                            double mask_ratio, std::uint64_t mask_seed) {
  const Mesh mesh = lbs_forward(spec, params_world);

  SceneRecord rec;
  rec.id = id;
  rec.spec_path = spec_path;
  rec.params_world = params_world;
  rec.intr = intr;
  rec.ext = ext;
  rec.t_b = t_b;
  rec.joints3d = mesh.joints;
  try {
    rec.keypoints2d = project(mesh.joints, intr, ext, t_b);
  } catch (const CameraError& e) {
    throw CameraError(std::string("record ") + id + " rejected: " + e.what());
  }
  rec.bbox = bbox_from_projection(rec.keypoints2d, intr.width, intr.height);
  rec.bbox_enc = bbox_encode(rec.bbox, intr.width, intr.height);

  const DepthMap depth = render_depth(mesh, intr, ext, t_b);
  rec.depth_path = id + ".pfm";
  write_pfm(depth, (fs::path(out_dir) / rec.depth_path).string());

  if (mask_ratio > 0.0) {
    DepthMap crop = crop_resize_depth(depth, rec.bbox, 256);
    apply_block_mask(crop, mask_ratio, mask_seed);
    MaskInfo m;
    m.ratio = mask_ratio;
    m.seed = mask_seed;
    m.crop_path = id + "_crop_masked.pfm";
    write_pfm(crop, (fs::path(out_dir) / m.crop_path).string());
    rec.mask = m;
  }

  validate_record(rec);
  return rec;
}

void validate_record(const SceneRecord& rec, double tol_px) {
  const Points2 reproj = project(rec.joints3d, rec.intr, rec.ext, rec.t_b);
  if (reproj.rows() != rec.keypoints2d.rows()) {
    throw ValidationError("record " + rec.id + ": keypoint count mismatch");
  }
  const double err = (reproj - rec.keypoints2d).cwiseAbs().maxCoeff();
  if (!(err <= tol_px)) {
    throw ValidationError("record " + rec.id + ": keypoints do not reproject (max err " +
                          std::to_string(err) + " px)");
  }
  const double half = rec.bbox.b / 2.0;
  const double cx_img = rec.bbox.cx + rec.intr.width / 2.0;
  const double cy_img = rec.bbox.cy + rec.intr.height / 2.0;
  const double slack = 1e-9 * std::max(1.0, rec.bbox.b);
  for (Eigen::Index i = 0; i < rec.keypoints2d.rows(); ++i) {
    if (std::abs(rec.keypoints2d(i, 0) - cx_img) > half + slack ||
        std::abs(rec.keypoints2d(i, 1) - cy_img) > half + slack) {
      throw ValidationError("record " + rec.id + ": bbox does not contain keypoint " +
                            std::to_string(i));
    }
  }
  const BBoxEncoding enc = bbox_encode(rec.bbox, rec.intr.width, rec.intr.height);
  if (enc.cx_norm != rec.bbox_enc.cx_norm || enc.cy_norm != rec.bbox_enc.cy_norm ||
      enc.b_norm != rec.bbox_enc.b_norm) {
    throw ValidationError("record " + rec.id + ": bbox encoding is inconsistent");
  }
}

DatasetSummary generate_dataset(const BodyModelSpec& spec, const DatasetConfig& cfg) {
  if (cfg.count < 0) throw ValidationError("dataset count must be >= 0");
  validate_ranges(cfg.ranges);
  fs::create_directories(cfg.out_dir);

  const double fov = cfg.fov_rad > 0.0 ? cfg.fov_rad : default_fov_rad();
  const Intrinsics intr = intrinsics_from_fov(cfg.width, cfg.height, fov);

  DatasetSummary summary;
  summary.spec_path = (fs::path(cfg.out_dir) / "spec.json").string();
  save_body_spec(spec, summary.spec_path);

  std::vector<BodyParams> pose_bank;
  if (cfg.ranges.pose_source == PoseSource::kPoseFile) {
    pose_bank = read_params_file(cfg.pose_file);
    if (pose_bank.empty()) throw ValidationError("pose file " + cfg.pose_file + " is empty");
  }

  std::vector<SceneRecord> records;
  records.reserve(static_cast<size_t>(cfg.count));
  for (int i = 0; i < cfg.count; ++i) {
    Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(i)));

    BodyParams body = zero_params(spec.joint_count());
    switch (cfg.ranges.pose_source) {
      case PoseSource::kZero:
        break;
      case PoseSource::kJitter:
        body = jitter_pose(rng, body, cfg.ranges.jitter_sigma, cfg.ranges.jitter_clamp);
        break;
      case PoseSource::kPoseFile: {
        const BodyParams& src = pose_bank[static_cast<size_t>(i) % pose_bank.size()];
        if (static_cast<int>(src.pose.size()) != spec.joint_count()) {
          throw ValidationError("pose file entry does not match the body spec joint count");
        }
        body.pose = src.pose;
        body.shape = src.shape;
        break;
      }
    }

    char id[32];
    std::snprintf(id, sizeof(id), "rec_%06d", i);

    bool placed = false;
    for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
      const SceneGeometry geo = sample_camera(rng, cfg.ranges);
      body.translation = geo.body_translation;
      try {
        std::uint64_t mask_seed = mix_seed(cfg.seed ^ 0x6d61736bULL, static_cast<std::uint64_t>(i));
        records.push_back(generate_record(spec, "spec.json", body, intr, geo.extrinsics,
                                          geo.t_b, id, cfg.out_dir, cfg.mask_ratio, mask_seed));
        placed = true;
      } catch (const CameraError&) {
        // joint behind the camera; resample the viewpoint
      }
    }
    if (!placed) {
      throw FitError(std::string("record ") + id +
                     ": no viewpoint kept the body in front of the camera in 100 tries");
    }
  }

  summary.manifest_path = (fs::path(cfg.out_dir) / "manifest.jsonl").string();
  write_manifest(records, summary.manifest_path);
  summary.count = cfg.count;
  return summary;
}

void write_manifest(const std::vector<SceneRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (const auto& rec : records) {
    out << Json(rec).dump() << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

ManifestReadResult read_manifest(const std::string& path, bool validate) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  ManifestReadResult out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const Json j = Json::parse(line);
      SceneRecord rec = j.get<SceneRecord>();
      if (validate) validate_record(rec);
      out.records.push_back(std::move(rec));
    } catch (const std::exception& e) {
      out.errors.push_back(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace camworld
