#include "camworld/serialize.hpp"

#include <fstream>

#include "camworld/errors.hpp"

namespace camworld {

namespace {

const Json& field(const Json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end()) throw SchemaError(std::string("missing field '") + name + "'");
  return *it;
}

double number(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_number()) throw SchemaError(std::string("field '") + name + "' must be a number");
  return v.get<double>();
}

Eigen::Vector3d vec3(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_array() || v.size() != 3 || !v[0].is_number()) {
    throw SchemaError(std::string("field '") + name + "' must be a 3-number array");
  }
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

Json vec3_json(const Eigen::Vector3d& v) { return Json::array({v.x(), v.y(), v.z()}); }

}  // namespace

Json points3_to_json(const Points3& p) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    rows.push_back(Json::array({p(i, 0), p(i, 1), p(i, 2)}));
  }
  return rows;
}

Points3 points3_from_json(const Json& j, const char* name) {
  if (!j.is_array()) throw SchemaError(std::string(name) + " must be an array of 3-vectors");
  Points3 p(static_cast<Eigen::Index>(j.size()), 3);
  for (size_t i = 0; i < j.size(); ++i) {
    const Json& row = j[i];
    if (!row.is_array() || row.size() != 3) {
      throw SchemaError(std::string(name) + "[" + std::to_string(i) + "] must have 3 entries");
    }
    for (int c = 0; c < 3; ++c) p(static_cast<Eigen::Index>(i), c) = row[c].get<double>();
  }
  return p;
}

Json points2_to_json(const Points2& p) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    rows.push_back(Json::array({p(i, 0), p(i, 1)}));
  }
  return rows;
}

Points2 points2_from_json(const Json& j, const char* name) {
  if (!j.is_array()) throw SchemaError(std::string(name) + " must be an array of 2-vectors");
  Points2 p(static_cast<Eigen::Index>(j.size()), 2);
  for (size_t i = 0; i < j.size(); ++i) {
    const Json& row = j[i];
    if (!row.is_array() || row.size() != 2) {
      throw SchemaError(std::string(name) + "[" + std::to_string(i) + "] must have 2 entries");
    }
    for (int c = 0; c < 2; ++c) p(static_cast<Eigen::Index>(i), c) = row[c].get<double>();
  }
  return p;
}

void to_json(Json& j, const BodyParams& p) {
  Json pose = Json::array();
  for (const auto& aa : p.pose) pose.push_back(vec3_json(aa));
  Json shape = Json::array();
  for (Eigen::Index i = 0; i < p.shape.size(); ++i) shape.push_back(p.shape[i]);
  j = Json{{"pose", pose}, {"shape", shape}, {"translation", vec3_json(p.translation)}};
}

void from_json(const Json& j, BodyParams& p) {
  const Json& pose = field(j, "pose");
  if (!pose.is_array() || pose.empty()) throw SchemaError("'pose' must be a non-empty array");
  std::vector<Eigen::Vector3d> aa(pose.size());
  for (size_t i = 0; i < pose.size(); ++i) {
    const Json& row = pose[i];
    if (!row.is_array() || row.size() != 3) {
      throw SchemaError("'pose' entries must be 3-number arrays");
    }
    aa[i] = Eigen::Vector3d(row[0].get<double>(), row[1].get<double>(), row[2].get<double>());
  }
  const Json& shape = field(j, "shape");
  if (!shape.is_array() || shape.size() != kShapeDims) {
    throw SchemaError("'shape' must have " + std::to_string(kShapeDims) + " entries");
  }
  Eigen::VectorXd sh(kShapeDims);
  for (int i = 0; i < kShapeDims; ++i) sh[i] = shape[i].get<double>();
  p = make_body_params(std::move(aa), std::move(sh), vec3(j, "translation"),
                       static_cast<int>(pose.size()));
}

void to_json(Json& j, const Intrinsics& intr) {
  j = Json{{"focal", intr.focal}, {"width", intr.width}, {"height", intr.height}};
}

void from_json(const Json& j, Intrinsics& intr) {
  intr.focal = number(j, "focal");
  intr.width = field(j, "width").get<int>();
  intr.height = field(j, "height").get<int>();
  if (intr.width < 1 || intr.height < 1 || !(intr.focal > 0.0)) {
    throw SchemaError("intrinsics out of range");
  }
}

void to_json(Json& j, const Extrinsics& ext) {
  j = Json{{"pitch", ext.pitch},
           {"roll", ext.roll},
           {"yaw", ext.yaw},
           {"center", vec3_json(ext.camera_center)}};
}

void from_json(const Json& j, Extrinsics& ext) {
  ext.pitch = normalize_angle(number(j, "pitch"));
  ext.roll = normalize_angle(number(j, "roll"));
  ext.yaw = normalize_angle(number(j, "yaw"));
  ext.camera_center = vec3(j, "center");
}

void to_json(Json& j, const BBox& b) { j = Json{{"cx", b.cx}, {"cy", b.cy}, {"b", b.b}}; }

void from_json(const Json& j, BBox& b) {
  b.cx = number(j, "cx");
  b.cy = number(j, "cy");
  b.b = number(j, "b");
}

void to_json(Json& j, const BBoxEncoding& e) {
  j = Json{{"cx_norm", e.cx_norm}, {"cy_norm", e.cy_norm}, {"b_norm", e.b_norm}};
}

void from_json(const Json& j, BBoxEncoding& e) {
  e.cx_norm = number(j, "cx_norm");
  e.cy_norm = number(j, "cy_norm");
  e.b_norm = number(j, "b_norm");
}

void to_json(Json& j, const LossWeights& w) {
  j = Json{{"l2d", w.l2d},     {"l3d", w.l3d},       {"lv", w.lv},
           {"lmix", w.lmix},   {"lroot", w.lroot},   {"lalpha", w.lalpha},
           {"lgamma", w.lgamma}};
}

void from_json(const Json& j, LossWeights& w) {
  w = LossWeights{};
  if (j.contains("l2d")) w.l2d = number(j, "l2d");
  if (j.contains("l3d")) w.l3d = number(j, "l3d");
  if (j.contains("lv")) w.lv = number(j, "lv");
  if (j.contains("lmix")) w.lmix = number(j, "lmix");
  if (j.contains("lroot")) w.lroot = number(j, "lroot");
  if (j.contains("lalpha")) w.lalpha = number(j, "lalpha");
  if (j.contains("lgamma")) w.lgamma = number(j, "lgamma");
  validate_weights(w);
}

void to_json(Json& j, const FitConfig& cfg) {
  j = Json{{"max_iters", cfg.max_iters},
           {"grad_tol", cfg.grad_tol},
           {"armijo_c", cfg.armijo_c},
           {"backtrack", cfg.backtrack},
           {"init_step", cfg.init_step},
           {"min_step", cfg.min_step},
           {"pitch_grid_min_deg", rad_to_deg(cfg.pitch_grid_min)},
           {"pitch_grid_max_deg", rad_to_deg(cfg.pitch_grid_max)},
           {"pitch_grid_step_deg", rad_to_deg(cfg.pitch_grid_step)},
           {"pitch_refine_tol", cfg.pitch_refine_tol},
           {"weights", cfg.weights},
           {"seed", cfg.seed}};
}

void from_json(const Json& j, FitConfig& cfg) {
  cfg = FitConfig{};
  if (j.contains("max_iters")) cfg.max_iters = field(j, "max_iters").get<int>();
  if (j.contains("grad_tol")) cfg.grad_tol = number(j, "grad_tol");
  if (j.contains("armijo_c")) cfg.armijo_c = number(j, "armijo_c");
  if (j.contains("backtrack")) cfg.backtrack = number(j, "backtrack");
  if (j.contains("init_step")) cfg.init_step = number(j, "init_step");
  if (j.contains("min_step")) cfg.min_step = number(j, "min_step");
  if (j.contains("pitch_grid_min_deg")) {
    cfg.pitch_grid_min = deg_to_rad(number(j, "pitch_grid_min_deg"));
  }
  if (j.contains("pitch_grid_max_deg")) {
    cfg.pitch_grid_max = deg_to_rad(number(j, "pitch_grid_max_deg"));
  }
  if (j.contains("pitch_grid_step_deg")) {
    cfg.pitch_grid_step = deg_to_rad(number(j, "pitch_grid_step_deg"));
  }
  if (j.contains("pitch_refine_tol")) cfg.pitch_refine_tol = number(j, "pitch_refine_tol");
  if (j.contains("weights")) cfg.weights = field(j, "weights").get<LossWeights>();
  if (j.contains("seed")) cfg.seed = field(j, "seed").get<std::uint64_t>();
  validate_config(cfg);
}

void to_json(Json& j, const FitReport& r) {
  j = Json{{"initial_loss", r.initial_loss},
           {"final_loss", r.final_loss},
           {"iterations", r.iterations},
           {"converged", r.converged},
           {"status", r.status},
           {"l2d", r.breakdown.l2d},
           {"l3d", r.breakdown.l3d},
           {"lv", r.breakdown.lv},
           {"lmix", r.breakdown.lmix}};
}

void to_json(Json& j, const SceneRecord& rec) {
  j = Json{{"schema", kSchemaVersion},
           {"id", rec.id},
           {"spec_path", rec.spec_path},
           {"params", rec.params_world},
           {"intrinsics", rec.intr},
           {"extrinsics", rec.ext},
           {"t_b", vec3_json(rec.t_b)},
           {"joints3d", points3_to_json(rec.joints3d)},
           {"keypoints2d", points2_to_json(rec.keypoints2d)},
           {"bbox", rec.bbox},
           {"bbox_encoding", rec.bbox_enc},
           {"depth_path", rec.depth_path}};
  if (rec.mask) {
    j["mask"] = Json{{"ratio", rec.mask->ratio},
                     {"seed", rec.mask->seed},
                     {"crop_path", rec.mask->crop_path}};
  }
}

void from_json(const Json& j, SceneRecord& rec) {
  rec.id = field(j, "id").get<std::string>();
  rec.spec_path = field(j, "spec_path").get<std::string>();
  rec.params_world = field(j, "params").get<BodyParams>();
  rec.intr = field(j, "intrinsics").get<Intrinsics>();
  rec.ext = field(j, "extrinsics").get<Extrinsics>();
  rec.t_b = vec3(j, "t_b");
  rec.joints3d = points3_from_json(field(j, "joints3d"), "joints3d");
  rec.keypoints2d = points2_from_json(field(j, "keypoints2d"), "keypoints2d");
  rec.bbox = field(j, "bbox").get<BBox>();
  rec.bbox_enc = field(j, "bbox_encoding").get<BBoxEncoding>();
  rec.depth_path = field(j, "depth_path").get<std::string>();
  rec.mask.reset();
  if (j.contains("mask")) {
    MaskInfo m;
    const Json& mj = field(j, "mask");
    m.ratio = number(mj, "ratio");
    m.seed = field(mj, "seed").get<std::uint64_t>();
    m.crop_path = field(mj, "crop_path").get<std::string>();
    rec.mask = m;
  }
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

void save_json_file(const Json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << j.dump() << '\n';
  if (!out) throw IoError("failed writing " + path);
}

std::vector<BodyParams> read_params_file(const std::string& path) {
  const Json j = load_json_file(path);
  if (!j.is_object() || !j.contains("params")) {
    throw SchemaError(path + ": expected an object with a 'params' array");
  }
  const Json& arr = j["params"];
  if (!arr.is_array()) throw SchemaError(path + ": 'params' must be an array");
  std::vector<BodyParams> out;
  out.reserve(arr.size());
  for (const auto& e : arr) out.push_back(e.get<BodyParams>());
  return out;
}

void write_params_file(const std::vector<BodyParams>& params, const std::string& path) {
  Json j{{"schema", kSchemaVersion}, {"params", params}};
  save_json_file(j, path);
}

FitConfig read_fit_config(const std::string& path) {
  return load_json_file(path).get<FitConfig>();
}

// ---------------------------------------------------------------------------
// Body spec file format
// ---------------------------------------------------------------------------

namespace {

Eigen::MatrixXd matrix_from_json(const Json& j, const char* name) {
  if (!j.is_array() || j.empty()) {
    throw SchemaError(std::string(name) + " must be a non-empty 2D array");
  }
  const size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw SchemaError(std::string(name) + " rows must be non-empty arrays");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw SchemaError(std::string(name) + " row " + std::to_string(r) + " has ragged size");
    }
    for (size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

BodyModelSpec load_body_spec(const std::string& path) {
  const Json j = load_json_file(path);
  if (!j.is_object()) throw SchemaError(path + ": expected a JSON object");
  BodyModelSpec spec;
  spec.template_vertices = points3_from_json(field(j, "template_vertices"), "template_vertices");

  const Json& faces = field(j, "faces");
  if (!faces.is_array()) throw SchemaError("'faces' must be an array");
  for (const auto& f : faces) {
    if (!f.is_array() || f.size() != 3) throw SchemaError("'faces' entries must be triples");
    spec.faces.push_back({f[0].get<int>(), f[1].get<int>(), f[2].get<int>()});
  }

  spec.joint_regressor = matrix_from_json(field(j, "joint_regressor"), "joint_regressor");
  const Json& parents = field(j, "parents");
  if (!parents.is_array()) throw SchemaError("'parents' must be an array");
  for (const auto& p : parents) spec.parents.push_back(p.get<int>());
  spec.skinning_weights = matrix_from_json(field(j, "skinning_weights"), "skinning_weights");

  const Json& shapes = field(j, "shape_blendshapes");
  if (!shapes.is_array()) throw SchemaError("'shape_blendshapes' must be an array");
  for (const auto& s : shapes) {
    spec.shape_blendshapes.push_back(points3_from_json(s, "shape_blendshapes"));
  }
  if (j.contains("pose_blendshapes")) {
    std::vector<Points3> pb;
    for (const auto& s : j["pose_blendshapes"]) {
      pb.push_back(points3_from_json(s, "pose_blendshapes"));
    }
    spec.pose_blendshapes = std::move(pb);
  }
  validate_spec(spec);
  return spec;
}

void save_body_spec(const BodyModelSpec& spec, const std::string& path) {
  Json j{{"schema", kSchemaVersion},
         {"template_vertices", points3_to_json(spec.template_vertices)},
         {"joint_regressor", matrix_to_json(spec.joint_regressor)},
         {"parents", spec.parents},
         {"skinning_weights", matrix_to_json(spec.skinning_weights)}};
  Json faces = Json::array();
  for (const auto& f : spec.faces) faces.push_back(Json::array({f[0], f[1], f[2]}));
  j["faces"] = faces;
  Json shapes = Json::array();
  for (const auto& s : spec.shape_blendshapes) shapes.push_back(points3_to_json(s));
  j["shape_blendshapes"] = shapes;
  if (spec.pose_blendshapes) {
    Json pb = Json::array();
    for (const auto& s : *spec.pose_blendshapes) pb.push_back(points3_to_json(s));
    j["pose_blendshapes"] = pb;
  }
  save_json_file(j, path);
}

}  // namespace camworld
