// Command-line surface: dataset generation, pitch estimation, frame
// transforms, mesh refinement, world-frame metrics and depth/obj rendering.
// JSON goes to stdout, logs to stderr; every artifact carries "schema": 1.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "camworld/body_model.hpp"
#include "camworld/camera.hpp"
#include "camworld/datagen.hpp"
#include "camworld/errors.hpp"
#include "camworld/fitting.hpp"
#include "camworld/losses.hpp"
#include "camworld/metrics.hpp"
#include "camworld/rasterizer.hpp"
#include "camworld/rng.hpp"
#include "camworld/rotation.hpp"
#include "camworld/serialize.hpp"
#include "camworld/transform.hpp"

namespace fs = std::filesystem;
using namespace camworld;

namespace {

constexpr double kDefaultFovDeg = 53.13010235415598;  // 2*atan(1/2)

void emit(const Json& j) { std::cout << j.dump() << std::endl; }

BodyModelSpec load_spec_or_toy(const std::string& path) {
  return path.empty() ? toy_body_spec() : load_body_spec(path);
}

BodyModelSpec spec_for_manifest(const std::string& manifest_path,
                                const std::vector<SceneRecord>& records,
                                const std::string& override_path) {
  if (!override_path.empty()) return load_body_spec(override_path);
  if (records.empty()) return toy_body_spec();
  const fs::path rel = records.front().spec_path;
  return load_body_spec((fs::path(manifest_path).parent_path() / rel).string());
}

void add_weight_flags(CLI::App* cmd, LossWeights& w) {
  cmd->add_option("--l2d", w.l2d, "2D reprojection weight");
  cmd->add_option("--l3d", w.l3d, "3D keypoint weight");
  cmd->add_option("--lv", w.lv, "vertex weight");
  cmd->add_option("--lmix", w.lmix, "pose hybrid weight");
  cmd->add_option("--lroot", w.lroot, "root-orientation weight inside the hybrid term");
  cmd->add_option("--lalpha", w.lalpha, "pitch weight in the camera loss");
  cmd->add_option("--lgamma", w.lgamma, "roll weight in the camera loss");
}

struct GridFlags {
  std::vector<double> range_deg;
  double step_deg = 0.0;
};

void add_grid_flags(CLI::App* cmd, GridFlags& g) {
  cmd->add_option("--grid-range-deg", g.range_deg, "pitch grid range, two values")
      ->expected(2);
  cmd->add_option("--grid-step-deg", g.step_deg, "pitch grid step in degrees");
}

void apply_grid_flags(const GridFlags& g, FitConfig& cfg) {
  if (g.range_deg.size() == 2) {
    cfg.pitch_grid_min = deg_to_rad(g.range_deg[0]);
    cfg.pitch_grid_max = deg_to_rad(g.range_deg[1]);
  }
  if (g.step_deg > 0.0) cfg.pitch_grid_step = deg_to_rad(g.step_deg);
}

std::vector<SceneRecord> load_records(const std::string& manifest) {
  ManifestReadResult r = read_manifest(manifest, true);
  for (const auto& e : r.errors) std::cerr << "warning: " << e << "\n";
  return std::move(r.records);
}

// Fit results files are {"schema":1,"results":[{"id":...,"params":...},...]};
// plain parameter files are {"schema":1,"params":[...]}.
std::vector<BodyParams> read_pred_params(const std::string& path) {
  const Json j = load_json_file(path);
  std::vector<BodyParams> out;
  if (j.contains("results")) {
    for (const auto& e : j["results"]) {
      if (!e.contains("params")) {
        throw SchemaError(path + ": result entry without params (did a record diverge?)");
      }
      out.push_back(e["params"].get<BodyParams>());
    }
    return out;
  }
  return read_params_file(path);
}

// ---------------------------------------------------------------------------

struct GenArgs {
  int count = 10;
  std::string out_dir;
  std::string spec_path;
  std::string pose_file;
  std::string pose_source = "jitter";
  std::uint64_t seed = 0;
  int width = 640;
  int height = 480;
  double fov_deg = kDefaultFovDeg;
  double mask_ratio = 0.0;
  std::vector<double> pitch_range{-45.0, 45.0};
  std::vector<double> roll_range{-15.0, 15.0};
  std::vector<double> yaw_range{-180.0, 180.0};
  std::vector<double> dist_range{2.0, 6.0};
  double aim_offset = 0.15;
};

int run_gen(const GenArgs& a) {
  DatasetConfig cfg;
  cfg.count = a.count;
  cfg.seed = a.seed;
  cfg.width = a.width;
  cfg.height = a.height;
  cfg.fov_rad = deg_to_rad(a.fov_deg);
  cfg.mask_ratio = a.mask_ratio;
  cfg.out_dir = a.out_dir;
  cfg.pose_file = a.pose_file;
  cfg.ranges.pitch_min = deg_to_rad(a.pitch_range[0]);
  cfg.ranges.pitch_max = deg_to_rad(a.pitch_range[1]);
  cfg.ranges.roll_min = deg_to_rad(a.roll_range[0]);
  cfg.ranges.roll_max = deg_to_rad(a.roll_range[1]);
  cfg.ranges.yaw_min = deg_to_rad(a.yaw_range[0]);
  cfg.ranges.yaw_max = deg_to_rad(a.yaw_range[1]);
  cfg.ranges.dist_min = a.dist_range[0];
  cfg.ranges.dist_max = a.dist_range[1];
  cfg.ranges.aim_offset_max = a.aim_offset;
  if (a.pose_source == "zero") {
    cfg.ranges.pose_source = PoseSource::kZero;
  } else if (a.pose_source == "jitter") {
    cfg.ranges.pose_source = PoseSource::kJitter;
  } else if (a.pose_source == "file") {
    cfg.ranges.pose_source = PoseSource::kPoseFile;
  } else {
    throw ValidationError("pose source must be zero, jitter or file");
  }

  const BodyModelSpec spec = load_spec_or_toy(a.spec_path);
  const DatasetSummary sum = generate_dataset(spec, cfg);
  emit(Json{{"schema", kSchemaVersion},
            {"manifest", sum.manifest_path},
            {"spec", sum.spec_path},
            {"records", sum.count},
            {"seed", a.seed}});
  return 0;
}

// ---------------------------------------------------------------------------

struct PitchArgs {
  std::string manifest;
  std::string method = "keypoints";
  std::string out;
  std::string spec_path;
  std::string config_path;
  GridFlags grid;
};

int run_estimate_pitch(const PitchArgs& a) {
  FitConfig cfg = a.config_path.empty() ? FitConfig{} : read_fit_config(a.config_path);
  apply_grid_flags(a.grid, cfg);
  const std::vector<SceneRecord> records = load_records(a.manifest);
  const fs::path base = fs::path(a.manifest).parent_path();

  std::optional<BodyModelSpec> spec;
  if (a.method == "depth") {
    spec = spec_for_manifest(a.manifest, records, a.spec_path);
  } else if (a.method != "keypoints") {
    throw ValidationError("method must be keypoints or depth");
  }

  Json results = Json::array();
  std::vector<double> abs_err_deg;
  for (const auto& rec : records) {
    Json entry{{"id", rec.id}};
    try {
      double pitch = 0.0;
      if (a.method == "keypoints") {
        const PitchEstimate est =
            estimate_pitch(rec.joints3d, rec.keypoints2d, rec.intr, cfg);
        pitch = est.pitch;
        entry["t_b"] = Json::array({est.t_b.x(), est.t_b.y(), est.t_b.z()});
        entry["objective"] = est.report.final_loss;
        entry["iterations"] = est.report.iterations;
        entry["converged"] = est.report.converged;
      } else {
        const DepthMap observed = read_pfm((base / rec.depth_path).string());
        const Mesh mesh = lbs_forward(*spec, rec.params_world);
        const PitchDepthEstimate est =
            estimate_pitch_depth(observed, mesh, rec.intr, rec.t_b, cfg);
        pitch = est.pitch;
        entry["objective"] = est.report.final_loss;
        entry["iterations"] = est.report.iterations;
        entry["converged"] = est.report.converged;
      }
      entry["pitch_rad"] = pitch;
      entry["pitch_deg"] = rad_to_deg(pitch);
      const double err = rad_to_deg(std::abs(pitch - rec.ext.pitch));
      entry["abs_error_deg"] = err;
      abs_err_deg.push_back(err);
    } catch (const Error& e) {
      entry["error"] = std::string(e.what());
    }
    results.push_back(entry);
  }

  Json out{{"schema", kSchemaVersion}, {"method", a.method}, {"results", results}};
  if (!abs_err_deg.empty()) {
    std::vector<double> sorted = abs_err_deg;
    std::sort(sorted.begin(), sorted.end());
    double mean = 0.0;
    for (double e : sorted) mean += e;
    out["mean_abs_error_deg"] = mean / sorted.size();
    out["median_abs_error_deg"] = sorted[sorted.size() / 2];
  }
  if (!a.out.empty()) save_json_file(out, a.out);
  emit(out);
  return 0;
}

// ---------------------------------------------------------------------------

struct TransformArgs {
  std::string params_path;
  double pitch_deg = 0.0;
  bool inverse = false;
  std::string out;
};

int run_transform(const TransformArgs& a) {
  const std::vector<BodyParams> in = read_params_file(a.params_path);
  std::vector<BodyParams> out;
  out.reserve(in.size());
  const double pitch = deg_to_rad(a.pitch_deg);
  for (const auto& p : in) {
    out.push_back(a.inverse ? world_to_camera(p, pitch) : camera_to_world(p, pitch));
  }
  Json j{{"schema", kSchemaVersion}, {"params", out}};
  if (!a.out.empty()) save_json_file(j, a.out);
  emit(j);
  return 0;
}

// ---------------------------------------------------------------------------

struct FitArgs {
  std::string manifest;
  std::string out;
  std::string spec_path;
  std::string config_path;
  std::string init_params;
  std::string pitch_source = "gt";
  std::string pitch_file;
  double perturb_root_deg = 0.0;
  double perturb_pose_sigma = 0.0;
  std::uint64_t seed = 0;
  int max_iters = 0;
  LossWeights weights;
  GridFlags grid;
};

int run_fit(const FitArgs& a) {
  FitConfig cfg = a.config_path.empty() ? FitConfig{} : read_fit_config(a.config_path);
  cfg.weights = a.weights;
  cfg.seed = a.seed;
  if (a.max_iters > 0) cfg.max_iters = a.max_iters;
  apply_grid_flags(a.grid, cfg);
  validate_config(cfg);

  const std::vector<SceneRecord> records = load_records(a.manifest);
  const BodyModelSpec spec = spec_for_manifest(a.manifest, records, a.spec_path);

  std::vector<BodyParams> init_bank;
  if (!a.init_params.empty()) {
    init_bank = read_pred_params(a.init_params);
    if (init_bank.size() != records.size()) {
      throw ValidationError("init params count does not match the manifest");
    }
  }

  std::map<std::string, double> pitch_by_id;
  if (a.pitch_source == "file") {
    const Json j = load_json_file(a.pitch_file);
    for (const auto& e : j.at("results")) {
      if (e.contains("pitch_rad")) {
        pitch_by_id[e.at("id").get<std::string>()] = e.at("pitch_rad").get<double>();
      }
    }
  } else if (a.pitch_source != "gt" && a.pitch_source != "estimate") {
    throw ValidationError("pitch source must be gt, estimate or file");
  }

  Json results = Json::array();
  int converged = 0;
  double loss_sum = 0.0;
  int fitted = 0;
  for (size_t i = 0; i < records.size(); ++i) {
    const SceneRecord& rec = records[i];
    Json entry{{"id", rec.id}};
    try {
      double pitch = rec.ext.pitch;
      if (a.pitch_source == "estimate") {
        pitch = estimate_pitch(rec.joints3d, rec.keypoints2d, rec.intr, cfg).pitch;
      } else if (a.pitch_source == "file") {
        const auto it = pitch_by_id.find(rec.id);
        if (it == pitch_by_id.end()) throw FitError("no pitch for record " + rec.id);
        pitch = it->second;
      }

      BodyParams init;
      if (!init_bank.empty()) {
        init = init_bank[i];
      } else {
        init = world_to_camera(rec.params_world, pitch);
        if (a.perturb_root_deg != 0.0 || a.perturb_pose_sigma != 0.0) {
          Rng rng(mix_seed(a.seed, static_cast<std::uint64_t>(i)));
          Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
          axis.normalize();
          const Eigen::Matrix3d bump =
              axis_angle_to_matrix(deg_to_rad(a.perturb_root_deg) * axis);
          init.pose[0] = matrix_to_axis_angle(bump * axis_angle_to_matrix(init.pose[0]));
          for (size_t k = 1; k < init.pose.size(); ++k) {
            for (int c = 0; c < 3; ++c) init.pose[k][c] += a.perturb_pose_sigma * rng.normal();
          }
        }
      }

      const Mesh gt_mesh = lbs_forward(spec, rec.params_world);
      FitTargets targets;
      targets.keypoints2d = rec.keypoints2d;
      targets.joints3d = rec.joints3d;
      targets.vertices = gt_mesh.vertices;
      targets.pose = rec.params_world.pose;

      const AdjustResult res =
          adjust_mesh(spec, init, pitch, rec.intr, rec.t_b, targets, cfg);
      entry["pitch_rad"] = pitch;
      entry["params"] = res.params_world;
      entry["report"] = res.report;
      if (res.report.converged) ++converged;
      loss_sum += res.report.final_loss;
      ++fitted;
    } catch (const Error& e) {
      entry["error"] = std::string(e.what());
    }
    results.push_back(entry);
  }

  Json out{{"schema", kSchemaVersion}, {"results", results}};
  if (!a.out.empty()) save_json_file(out, a.out);
  emit(Json{{"schema", kSchemaVersion},
            {"records", records.size()},
            {"fitted", fitted},
            {"converged", converged},
            {"mean_final_loss", fitted > 0 ? loss_sum / fitted : 0.0},
            {"weights", cfg.weights},
            {"out", a.out}});
  return 0;
}

// ---------------------------------------------------------------------------

struct MetricsArgs {
  std::string pred_path;
  std::string gt_manifest;
  std::string spec_path;
  bool naive_compare = false;
};

Json metric_row(const BodyModelSpec& spec, const std::vector<BodyParams>& pred,
                const std::vector<SceneRecord>& records) {
  double wmpjpe = 0.0, pampjpe = 0.0, wpve = 0.0;
  for (size_t i = 0; i < records.size(); ++i) {
    const Mesh pm = lbs_forward(spec, pred[i]);
    const Mesh gm = lbs_forward(spec, records[i].params_world);
    wmpjpe += w_mpjpe_mm(pm.joints, gm.joints);
    pampjpe += pa_mpjpe_mm(pm.joints, gm.joints);
    wpve += wpve_mm(pm.vertices, gm.vertices, pm.joints.row(0), gm.joints.row(0));
  }
  const double n = static_cast<double>(records.size());
  return Json{{"wmpjpe_mm", wmpjpe / n},
              {"pampjpe_mm", pampjpe / n},
              {"wpve_mm", wpve / n},
              {"n_records", records.size()}};
}

int run_metrics(const MetricsArgs& a) {
  const std::vector<SceneRecord> records = load_records(a.gt_manifest);
  if (records.empty()) throw ValidationError("ground-truth manifest has no records");
  const BodyModelSpec spec = spec_for_manifest(a.gt_manifest, records, a.spec_path);
  const std::vector<BodyParams> pred = read_pred_params(a.pred_path);
  if (pred.size() != records.size()) {
    throw ValidationError("prediction count (" + std::to_string(pred.size()) +
                          ") does not match manifest (" + std::to_string(records.size()) + ")");
  }

  if (!a.naive_compare) {
    Json row = metric_row(spec, pred, records);
    row["schema"] = kSchemaVersion;
    emit(row);
    return 0;
  }

  // Predictions are camera-frame here: score them taken naively as world
  // coordinates, then after the pitch transform.
  std::vector<BodyParams> transformed;
  transformed.reserve(pred.size());
  for (size_t i = 0; i < pred.size(); ++i) {
    transformed.push_back(camera_to_world(pred[i], records[i].ext.pitch));
  }
  Json naive = metric_row(spec, pred, records);
  naive["label"] = "naive_world";
  Json fixed = metric_row(spec, transformed, records);
  fixed["label"] = "camera_to_world";
  emit(Json{{"schema", kSchemaVersion}, {"rows", Json::array({naive, fixed})}});
  return 0;
}

// ---------------------------------------------------------------------------

struct RenderArgs {
  std::string spec_path;
  std::string params_path;
  int index = 0;
  double pitch_deg = 0.0;
  double roll_deg = 0.0;
  double yaw_deg = 0.0;
  double dist = 3.0;
  int width = 640;
  int height = 480;
  double fov_deg = kDefaultFovDeg;
  std::string out_pfm;
  std::string out_obj;
};

int run_render(const RenderArgs& a) {
  const BodyModelSpec spec = load_spec_or_toy(a.spec_path);
  Extrinsics ext;
  ext.pitch = deg_to_rad(a.pitch_deg);
  ext.roll = deg_to_rad(a.roll_deg);
  ext.yaw = deg_to_rad(a.yaw_deg);

  BodyParams params;
  if (!a.params_path.empty()) {
    const std::vector<BodyParams> bank = read_params_file(a.params_path);
    if (a.index < 0 || a.index >= static_cast<int>(bank.size())) {
      throw ValidationError("params index out of range");
    }
    params = bank[a.index];
  } else {
    params = zero_params(spec.joint_count());
    params.translation = rotation(ext).transpose() * Eigen::Vector3d(0.0, 0.0, a.dist);
  }

  const Intrinsics intr = intrinsics_from_fov(a.width, a.height, deg_to_rad(a.fov_deg));
  const Mesh mesh = lbs_forward(spec, params);
  const DepthMap depth = render_depth(mesh, intr, ext, Eigen::Vector3d::Zero());

  Json out{{"schema", kSchemaVersion}, {"covered_pixels", depth.covered_count()}};
  if (!a.out_pfm.empty()) {
    write_pfm(depth, a.out_pfm);
    out["pfm"] = a.out_pfm;
  }
  if (!a.out_obj.empty()) {
    write_obj(mesh, a.out_obj);
    out["obj"] = a.out_obj;
  }
  emit(out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"camera-to-world transforms for parametric body meshes"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* cmd_gen = app.add_subcommand("gen-dataset", "generate synthetic scene records");
  cmd_gen->add_option("--n", gen.count, "number of records");
  cmd_gen->add_option("--out", gen.out_dir, "output directory")->required();
  cmd_gen->add_option("--spec", gen.spec_path, "body spec JSON (default: built-in toy body)");
  cmd_gen->add_option("--seed", gen.seed, "master seed");
  cmd_gen->add_option("--width", gen.width, "image width");
  cmd_gen->add_option("--height", gen.height, "image height");
  cmd_gen->add_option("--fov-deg", gen.fov_deg, "diagonal field of view");
  cmd_gen->add_option("--mask-ratio", gen.mask_ratio, "block-mask ratio for 256x256 crops");
  cmd_gen->add_option("--pitch-range-deg", gen.pitch_range, "pitch range")->expected(2);
  cmd_gen->add_option("--roll-range-deg", gen.roll_range, "roll range")->expected(2);
  cmd_gen->add_option("--yaw-range-deg", gen.yaw_range, "yaw range")->expected(2);
  cmd_gen->add_option("--dist-range", gen.dist_range, "camera distance range, meters")
      ->expected(2);
  cmd_gen->add_option("--aim-offset", gen.aim_offset, "max lateral aim offset");
  cmd_gen->add_option("--pose-source", gen.pose_source, "zero | jitter | file");
  cmd_gen->add_option("--pose-file", gen.pose_file, "params file for --pose-source file");

  PitchArgs pitch;
  CLI::App* cmd_pitch = app.add_subcommand("estimate-pitch", "recover camera pitch per record");
  cmd_pitch->add_option("--manifest", pitch.manifest, "dataset manifest")->required();
  cmd_pitch->add_option("--method", pitch.method, "keypoints | depth");
  cmd_pitch->add_option("--out", pitch.out, "write results JSON here as well");
  cmd_pitch->add_option("--spec", pitch.spec_path, "body spec override");
  cmd_pitch->add_option("--config", pitch.config_path, "FitConfig JSON");
  add_grid_flags(cmd_pitch, pitch.grid);

  TransformArgs tr;
  CLI::App* cmd_tr = app.add_subcommand("transform", "camera-frame params to world frame");
  cmd_tr->add_option("--params", tr.params_path, "params file")->required();
  cmd_tr->add_option("--pitch-deg", tr.pitch_deg, "camera pitch in degrees");
  cmd_tr->add_flag("--inverse", tr.inverse, "apply world-to-camera instead");
  cmd_tr->add_option("--out", tr.out, "write transformed params here as well");

  FitArgs fit;
  CLI::App* cmd_fit = app.add_subcommand("fit", "world-frame mesh refinement per record");
  cmd_fit->add_option("--manifest", fit.manifest, "dataset manifest")->required();
  cmd_fit->add_option("--out", fit.out, "results file");
  cmd_fit->add_option("--spec", fit.spec_path, "body spec override");
  cmd_fit->add_option("--config", fit.config_path, "FitConfig JSON");
  cmd_fit->add_option("--init-params", fit.init_params,
                      "camera-frame init params (default: gt-derived)");
  cmd_fit->add_option("--pitch-source", fit.pitch_source, "gt | estimate | file");
  cmd_fit->add_option("--pitch-file", fit.pitch_file, "estimate-pitch results file");
  cmd_fit->add_option("--perturb-root-deg", fit.perturb_root_deg,
                      "root orientation error injected into the init");
  cmd_fit->add_option("--perturb-pose-sigma", fit.perturb_pose_sigma,
                      "pose noise injected into the init, radians");
  cmd_fit->add_option("--seed", fit.seed, "seed for init perturbations");
  cmd_fit->add_option("--max-iters", fit.max_iters, "iteration cap");
  add_weight_flags(cmd_fit, fit.weights);
  add_grid_flags(cmd_fit, fit.grid);

  MetricsArgs met;
  CLI::App* cmd_met = app.add_subcommand("metrics", "world-frame evaluation metrics");
  cmd_met->add_option("--pred", met.pred_path, "prediction params or fit results file")
      ->required();
  cmd_met->add_option("--gt", met.gt_manifest, "ground-truth manifest")->required();
  cmd_met->add_option("--spec", met.spec_path, "body spec override");
  cmd_met->add_flag("--naive-compare", met.naive_compare,
                    "treat predictions as camera-frame and score naive vs transformed");

  RenderArgs ren;
  CLI::App* cmd_ren = app.add_subcommand("render", "depth map / OBJ export");
  cmd_ren->add_option("--spec", ren.spec_path, "body spec (default: built-in toy body)");
  cmd_ren->add_option("--params", ren.params_path, "params file (default: zero pose)");
  cmd_ren->add_option("--index", ren.index, "entry to use from the params file");
  cmd_ren->add_option("--pitch-deg", ren.pitch_deg, "camera pitch");
  cmd_ren->add_option("--roll-deg", ren.roll_deg, "camera roll");
  cmd_ren->add_option("--yaw-deg", ren.yaw_deg, "camera yaw");
  cmd_ren->add_option("--dist", ren.dist, "body distance for the default pose");
  cmd_ren->add_option("--width", ren.width, "image width");
  cmd_ren->add_option("--height", ren.height, "image height");
  cmd_ren->add_option("--fov-deg", ren.fov_deg, "diagonal field of view");
  cmd_ren->add_option("--out-pfm", ren.out_pfm, "depth map output path");
  cmd_ren->add_option("--out-obj", ren.out_obj, "mesh output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_gen->parsed()) return run_gen(gen);
    if (cmd_pitch->parsed()) return run_estimate_pitch(pitch);
    if (cmd_tr->parsed()) return run_transform(tr);
    if (cmd_fit->parsed()) return run_fit(fit);
    if (cmd_met->parsed()) return run_metrics(met);
    if (cmd_ren->parsed()) return run_render(ren);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
