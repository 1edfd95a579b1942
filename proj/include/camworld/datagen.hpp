#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "camworld/body_model.hpp"
#include "camworld/camera.hpp"
#include "camworld/rasterizer.hpp"
#include "camworld/rng.hpp"
#include "camworld/types.hpp"

namespace camworld {

enum class PoseSource { kZero, kJitter, kPoseFile };

struct SamplerRanges {
  double pitch_min = deg_to_rad(-45.0);
  double pitch_max = deg_to_rad(45.0);
  double roll_min = deg_to_rad(-15.0);
  double roll_max = deg_to_rad(15.0);
  double yaw_min = deg_to_rad(-180.0);
  double yaw_max = deg_to_rad(180.0);
  double dist_min = 2.0;  // meters, camera-to-body
  double dist_max = 6.0;
  double aim_offset_max = 0.15;  // lateral view-direction offset, tan units
  PoseSource pose_source = PoseSource::kJitter;
  double jitter_sigma = 0.2;  // radians, non-root joints
  double jitter_clamp = 0.8;
};

void validate_ranges(const SamplerRanges& r);

// The camera sits at the world origin; sampling a viewpoint places the body
// in front of it instead, which is the same relative geometry.
struct SceneGeometry {
  Extrinsics extrinsics;            // camera_center stays at the origin
  Eigen::Vector3d t_b;              // R * camera_center (zero here)
  Eigen::Vector3d body_translation;  // world position of the body root
};

SceneGeometry sample_camera(Rng& rng, const SamplerRanges& ranges);

/// Seeded pose noise on non-root joints; the root stays as given so sampled
/// bodies remain upright in the world frame.
BodyParams jitter_pose(Rng& rng, const BodyParams& base, double sigma, double clamp);

struct MaskInfo {
  double ratio = 0.0;
  std::uint64_t seed = 0;
  std::string crop_path;  // masked 256x256 crop, sibling of the depth map
};

struct SceneRecord {
  std::string id;
  std::string spec_path;
  BodyParams params_world;
  Intrinsics intr;
  Extrinsics ext;
  Eigen::Vector3d t_b = Eigen::Vector3d::Zero();
  Points3 joints3d;    // world, meters
  Points2 keypoints2d;  // pixels
  BBox bbox;
  BBoxEncoding bbox_enc;
  std::string depth_path;  // PFM, relative to the manifest directory
  std::optional<MaskInfo> mask;
};

/// round-half-even(ratio * 256), the number of 16x16 blocks to mask.
int mask_block_count(double ratio);

/// Masks exactly mask_block_count(ratio) of the 256 blocks of a 256x256 grid
/// to the background value, chosen uniformly without replacement from seed.
void apply_block_mask(DepthMap& grid, double ratio, std::uint64_t seed);

/// Poses the body, projects keypoints, fits the box, renders and writes depth
/// (plus a masked crop when mask_ratio > 0), and validates the result.
SceneRecord generate_record(const BodyModelSpec& spec, const std::string& spec_path,
                            const BodyParams& params_world, const Intrinsics& intr,
                            const Extrinsics& ext, const Eigen::Vector3d& t_b,
                            const std::string& id, const std::string& out_dir,
                            double mask_ratio = 0.0, std::uint64_t mask_seed = 0);

/// Reprojection, box containment and encoding consistency. Throws
/// ValidationError on the first violation.
void validate_record(const SceneRecord& rec, double tol_px = 1e-6);

struct DatasetConfig {
  int count = 0;
  std::uint64_t seed = 0;
  SamplerRanges ranges;
  int width = 640;
  int height = 480;
  double fov_rad = 0.0;  // 0 = default_fov_rad()
  double mask_ratio = 0.0;
  std::string out_dir;
  std::string pose_file;  // used when ranges.pose_source == kPoseFile
};

struct DatasetSummary {
  std::string manifest_path;
  std::string spec_path;
  int count = 0;
};

/// Writes out_dir/spec.json, out_dir/manifest.jsonl and per-record PFM files.
/// Bitwise reproducible for a fixed config.
DatasetSummary generate_dataset(const BodyModelSpec& spec, const DatasetConfig& cfg);

// JSON-lines manifest. Reading skips malformed lines, reporting each with its
// line number.
struct ManifestReadResult {
  std::vector<SceneRecord> records;
  std::vector<std::string> errors;
};

void write_manifest(const std::vector<SceneRecord>& records, const std::string& path);
ManifestReadResult read_manifest(const std::string& path, bool validate = true);

}  // namespace camworld
