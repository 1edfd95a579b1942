#include "camworld/body_model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <Eigen/Geometry>

#include "camworld/errors.hpp"
#include "camworld/rotation.hpp"

namespace camworld {

namespace {

constexpr double kRowSumTol = 1e-6;

std::string row_msg(const char* what, int row, double sum) {
  std::ostringstream os;
  os << what << " row " << row << " sums to " << sum << ", expected 1";
  return os.str();
}

}  // namespace

void validate_spec(const BodyModelSpec& spec) {
  const int n = spec.vertex_count();
  const int j = spec.joint_count();
  if (n < 3) throw ValidationError("spec needs at least 3 vertices");
  if (j < 1) throw ValidationError("spec needs at least 1 joint");
  if (!spec.template_vertices.allFinite()) {
    throw ValidationError("template_vertices contains non-finite values");
  }

  for (size_t f = 0; f < spec.faces.size(); ++f) {
    for (int c : spec.faces[f]) {
      if (c < 0 || c >= n) {
        throw ValidationError("face " + std::to_string(f) + " references vertex " +
                              std::to_string(c) + " outside [0, " + std::to_string(n) + ")");
      }
    }
  }

  if (spec.parents[0] != -1) throw ValidationError("parents[0] must be the root (-1)");
  for (int k = 1; k < j; ++k) {
    if (spec.parents[k] < 0 || spec.parents[k] >= k) {
      throw ValidationError("parents[" + std::to_string(k) +
                            "] must point to an earlier joint, got " +
                            std::to_string(spec.parents[k]));
    }
  }

  if (spec.joint_regressor.rows() != j || spec.joint_regressor.cols() != n) {
    throw ValidationError("joint_regressor must be J x N");
  }
  if (!spec.joint_regressor.allFinite()) {
    throw ValidationError("joint_regressor contains non-finite values");
  }
  for (int r = 0; r < j; ++r) {
    const double s = spec.joint_regressor.row(r).sum();
    if (std::abs(s - 1.0) > kRowSumTol) throw ValidationError(row_msg("joint_regressor", r, s));
  }

  if (spec.skinning_weights.rows() != n || spec.skinning_weights.cols() != j) {
    throw ValidationError("skinning_weights must be N x J");
  }
  if (!spec.skinning_weights.allFinite()) {
    throw ValidationError("skinning_weights contains non-finite values");
  }
  for (int r = 0; r < n; ++r) {
    if (spec.skinning_weights.row(r).minCoeff() < 0.0) {
      throw ValidationError("skinning_weights row " + std::to_string(r) +
                            " has a negative entry");
    }
    const double s = spec.skinning_weights.row(r).sum();
    if (std::abs(s - 1.0) > kRowSumTol) throw ValidationError(row_msg("skinning_weights", r, s));
  }

  if (static_cast<int>(spec.shape_blendshapes.size()) != kShapeDims) {
    throw ValidationError("expected " + std::to_string(kShapeDims) + " shape blendshapes, got " +
                          std::to_string(spec.shape_blendshapes.size()));
  }
  for (int k = 0; k < kShapeDims; ++k) {
    if (spec.shape_blendshapes[k].rows() != n) {
      throw ValidationError("shape blendshape " + std::to_string(k) + " must be N x 3");
    }
    if (!spec.shape_blendshapes[k].allFinite()) {
      throw ValidationError("shape blendshape " + std::to_string(k) + " is non-finite");
    }
  }
  if (spec.pose_blendshapes) {
    for (size_t k = 0; k < spec.pose_blendshapes->size(); ++k) {
      if ((*spec.pose_blendshapes)[k].rows() != n) {
        throw ValidationError("pose blendshape " + std::to_string(k) + " must be N x 3");
      }
    }
  }
}

BodyParams make_body_params(std::vector<Eigen::Vector3d> pose, Eigen::VectorXd shape,
                            const Eigen::Vector3d& translation, int joint_count) {
  if (static_cast<int>(pose.size()) != joint_count) {
    throw ValidationError("pose has " + std::to_string(pose.size()) + " joints, spec has " +
                          std::to_string(joint_count));
  }
  if (shape.size() != kShapeDims) {
    throw ValidationError("shape must have " + std::to_string(kShapeDims) + " coefficients, got " +
                          std::to_string(shape.size()));
  }
  if (!translation.allFinite()) throw ValidationError("translation is non-finite");
  for (auto& aa : pose) {
    if (!aa.allFinite()) throw ValidationError("pose contains non-finite axis-angle");
    aa = normalize_axis_angle(aa);
  }
  return BodyParams{std::move(pose), std::move(shape), translation};
}

BodyParams zero_params(int joint_count) {
  BodyParams p;
  p.pose.assign(joint_count, Eigen::Vector3d::Zero());
  p.shape = Eigen::VectorXd::Zero(kShapeDims);
  p.translation.setZero();
  return p;
}

namespace {

void check_params(const BodyModelSpec& spec, const BodyParams& params) {
  if (static_cast<int>(params.pose.size()) != spec.joint_count()) {
    throw ValidationError("params have " + std::to_string(params.pose.size()) +
                          " pose joints, spec has " + std::to_string(spec.joint_count()));
  }
  if (params.shape.size() != kShapeDims) {
    throw ValidationError("params shape must have " + std::to_string(kShapeDims) +
                          " coefficients");
  }
}

Points3 shaped_template(const BodyModelSpec& spec, const Eigen::VectorXd& shape) {
  Points3 v0 = spec.template_vertices;
  for (int k = 0; k < kShapeDims; ++k) {
    if (shape[k] != 0.0) v0 += shape[k] * spec.shape_blendshapes[k];
  }
  return v0;
}

Eigen::Matrix4d local_transform(const Eigen::Matrix3d& rot, const Eigen::Vector3d& offset) {
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  t.topLeftCorner<3, 3>() = rot;
  t.topRightCorner<3, 1>() = offset;
  return t;
}

}  // namespace

Points3 rest_joints(const BodyModelSpec& spec, const Eigen::VectorXd& shape) {
  return spec.joint_regressor * shaped_template(spec, shape);
}

Mesh lbs_forward(const BodyModelSpec& spec, const BodyParams& params) {
  check_params(spec, params);
  const int n = spec.vertex_count();
  const int j = spec.joint_count();

  const Points3 v0 = shaped_template(spec, params.shape);
  const Points3 j0 = spec.joint_regressor * v0;

  std::vector<Eigen::Matrix4d> global(j);
  for (int k = 0; k < j; ++k) {
    const Eigen::Matrix3d rot = axis_angle_to_matrix(params.pose[k]);
    const int par = spec.parents[k];
    const Eigen::Vector3d offset =
        par < 0 ? Eigen::Vector3d(j0.row(k)) : Eigen::Vector3d(j0.row(k) - j0.row(par));
    const Eigen::Matrix4d local = local_transform(rot, offset);
    global[k] = par < 0 ? local : Eigen::Matrix4d(global[par] * local);
  }

  // Skinning transforms: rotate about each joint's rest location.
  std::vector<Eigen::Matrix4d> skin(j);
  for (int k = 0; k < j; ++k) {
    skin[k] = global[k];
    skin[k].topRightCorner<3, 1>() -=
        global[k].topLeftCorner<3, 3>() * Eigen::Vector3d(j0.row(k));
  }

  Mesh mesh;
  mesh.faces = spec.faces;
  mesh.vertices.resize(n, 3);
  for (int v = 0; v < n; ++v) {
    const Eigen::Vector3d p0 = v0.row(v);
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    for (int k = 0; k < j; ++k) {
      const double w = spec.skinning_weights(v, k);
      if (w == 0.0) continue;
      acc += w * (skin[k].topLeftCorner<3, 3>() * p0 + skin[k].topRightCorner<3, 1>());
    }
    mesh.vertices.row(v) = acc + params.translation;
  }

  mesh.joints.resize(j, 3);
  for (int k = 0; k < j; ++k) {
    mesh.joints.row(k) = Eigen::Vector3d(global[k].topRightCorner<3, 1>()) + params.translation;
  }
  if (!mesh.vertices.allFinite() || !mesh.joints.allFinite()) {
    throw ValidationError("lbs_forward produced non-finite geometry");
  }
  return mesh;
}

LbsResult lbs_forward_with_jacobian(const BodyModelSpec& spec, const BodyParams& params) {
  check_params(spec, params);
  const int n = spec.vertex_count();
  const int j = spec.joint_count();
  const int n_pose = 3 * j;
  const int n_chain = n_pose + kShapeDims;  // params the kinematic chain depends on
  const int p_total = lbs_param_count(j);

  const Points3 v0 = shaped_template(spec, params.shape);
  const Points3 j0 = spec.joint_regressor * v0;
  std::vector<Points3> dj0(kShapeDims);  // d rest_joints / d shape_k
  for (int k = 0; k < kShapeDims; ++k) {
    dj0[k] = spec.joint_regressor * spec.shape_blendshapes[k];
  }

  std::vector<Eigen::Matrix4d> global(j);
  // dglobal[k][p] for p in [0, n_chain); translation params enter only at the end.
  std::vector<std::vector<Eigen::Matrix4d>> dglobal(
      j, std::vector<Eigen::Matrix4d>(n_chain, Eigen::Matrix4d::Zero()));

  for (int k = 0; k < j; ++k) {
    const Eigen::Matrix3d rot = axis_angle_to_matrix(params.pose[k]);
    const auto drot = axis_angle_jacobian(params.pose[k]);
    const int par = spec.parents[k];
    const Eigen::Vector3d offset =
        par < 0 ? Eigen::Vector3d(j0.row(k)) : Eigen::Vector3d(j0.row(k) - j0.row(par));
    const Eigen::Matrix4d local = local_transform(rot, offset);

    // d local / d p: own pose components and every shape coefficient.
    std::vector<Eigen::Matrix4d> dlocal(n_chain, Eigen::Matrix4d::Zero());
    for (int c = 0; c < 3; ++c) {
      dlocal[3 * k + c].topLeftCorner<3, 3>() = drot[c];
    }
    for (int s = 0; s < kShapeDims; ++s) {
      const Eigen::Vector3d doff = par < 0
                                       ? Eigen::Vector3d(dj0[s].row(k))
                                       : Eigen::Vector3d(dj0[s].row(k) - dj0[s].row(par));
      dlocal[n_pose + s].topRightCorner<3, 1>() = doff;
    }

    if (par < 0) {
      global[k] = local;
      for (int p = 0; p < n_chain; ++p) dglobal[k][p] = dlocal[p];
    } else {
      global[k] = global[par] * local;
      for (int p = 0; p < n_chain; ++p) {
        dglobal[k][p] = dglobal[par][p] * local + global[par] * dlocal[p];
      }
    }
  }

  // Skinning transforms and their derivatives.
  std::vector<Eigen::Matrix4d> skin(j);
  std::vector<std::vector<Eigen::Matrix4d>> dskin(
      j, std::vector<Eigen::Matrix4d>(n_chain, Eigen::Matrix4d::Zero()));
  for (int k = 0; k < j; ++k) {
    const Eigen::Vector3d jk = j0.row(k);
    skin[k] = global[k];
    skin[k].topRightCorner<3, 1>() -= global[k].topLeftCorner<3, 3>() * jk;
    for (int p = 0; p < n_chain; ++p) {
      dskin[k][p] = dglobal[k][p];
      dskin[k][p].topRightCorner<3, 1>() -= dglobal[k][p].topLeftCorner<3, 3>() * jk;
    }
    for (int s = 0; s < kShapeDims; ++s) {
      dskin[k][n_pose + s].topRightCorner<3, 1>() -=
          global[k].topLeftCorner<3, 3>() * Eigen::Vector3d(dj0[s].row(k));
    }
  }

  LbsResult out;
  out.mesh.faces = spec.faces;
  out.mesh.vertices.resize(n, 3);
  out.mesh.joints.resize(j, 3);
  out.d_vertices = Eigen::MatrixXd::Zero(3 * n, p_total);
  out.d_joints = Eigen::MatrixXd::Zero(3 * j, p_total);

  for (int v = 0; v < n; ++v) {
    const Eigen::Vector3d p0 = v0.row(v);
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    for (int k = 0; k < j; ++k) {
      const double w = spec.skinning_weights(v, k);
      if (w == 0.0) continue;
      const Eigen::Matrix3d rot = skin[k].topLeftCorner<3, 3>();
      acc += w * (rot * p0 + skin[k].topRightCorner<3, 1>());
      for (int p = 0; p < n_chain; ++p) {
        const Eigen::Vector3d dv = dskin[k][p].topLeftCorner<3, 3>() * p0 +
                                   dskin[k][p].topRightCorner<3, 1>();
        out.d_vertices.block<3, 1>(3 * v, p) += w * dv;
      }
      for (int s = 0; s < kShapeDims; ++s) {
        out.d_vertices.block<3, 1>(3 * v, n_pose + s) +=
            w * (rot * Eigen::Vector3d(spec.shape_blendshapes[s].row(v)));
      }
    }
    out.mesh.vertices.row(v) = acc + params.translation;
    out.d_vertices.block<3, 3>(3 * v, n_chain).setIdentity();
  }

  for (int k = 0; k < j; ++k) {
    out.mesh.joints.row(k) =
        Eigen::Vector3d(global[k].topRightCorner<3, 1>()) + params.translation;
    for (int p = 0; p < n_chain; ++p) {
      out.d_joints.block<3, 1>(3 * k, p) = dglobal[k][p].topRightCorner<3, 1>();
    }
    out.d_joints.block<3, 3>(3 * k, n_chain).setIdentity();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Toy body: 8 capsule parts, 8 vertices per ring, 3 rings per part (N = 192).
// Ring-0 vertices of each part average exactly to the part's joint, carry full
// skinning weight on it, and form the joint regressor row, which keeps chain
// joints and regressed joints identical under any pose and shape.
// ---------------------------------------------------------------------------

namespace {

struct ToyPart {
  Eigen::Vector3d start;  // joint location
  Eigen::Vector3d end;    // child joint or virtual tip
  double radius;
  int parent;
  int blend_child;  // child sharing the end ring, -1 if none
};

constexpr int kRingVerts = 8;
constexpr int kRings = 3;
constexpr int kPartVerts = kRingVerts * kRings;

// cos/sin at 45-degree steps; values exact in binary where possible so ring
// sums cancel exactly.
void ring_table(double* c, double* s) {
  const double r = std::sqrt(0.5);
  const double cs[kRingVerts] = {1.0, r, 0.0, -r, -1.0, -r, 0.0, r};
  const double sn[kRingVerts] = {0.0, r, 1.0, r, 0.0, -r, -1.0, -r};
  for (int i = 0; i < kRingVerts; ++i) {
    c[i] = cs[i];
    s[i] = sn[i];
  }
}

}  // namespace

BodyModelSpec toy_body_spec() {
  // Joint coordinates keep parent/child magnitudes within a factor of two per
  // component, so rest-pose chain translations telescope exactly in doubles.
  const std::vector<ToyPart> parts = {
      {{0.0, 0.0, 0.0}, {0.0, -0.25, 0.0}, 0.09, -1, 1},      // pelvis
      {{0.0, -0.25, 0.0}, {0.0, -0.50, 0.0}, 0.08, 0, 2},     // spine
      {{0.0, -0.50, 0.0}, {0.0, -0.65, 0.0}, 0.05, 1, 3},     // neck
      {{0.0, -0.65, 0.0}, {0.0, -0.85, 0.0}, 0.07, 2, -1},    // head
      {{0.25, -0.45, 0.0}, {0.50, -0.45, 0.0}, 0.045, 1, 5},  // left upper arm
      {{0.50, -0.45, 0.0}, {0.75, -0.45, 0.0}, 0.04, 4, -1},  // left forearm
      {{-0.25, -0.45, 0.0}, {-0.50, -0.45, 0.0}, 0.045, 1, 7},  // right upper arm
      {{-0.50, -0.45, 0.0}, {-0.75, -0.45, 0.0}, 0.04, 6, -1},  // right forearm
  };
  const int j = static_cast<int>(parts.size());
  const int n = j * kPartVerts;

  BodyModelSpec spec;
  spec.template_vertices.resize(n, 3);
  spec.joint_regressor = Eigen::MatrixXd::Zero(j, n);
  spec.skinning_weights = Eigen::MatrixXd::Zero(n, j);
  spec.parents.resize(j);

  double ring_c[kRingVerts], ring_s[kRingVerts];
  ring_table(ring_c, ring_s);

  for (int p = 0; p < j; ++p) {
    const ToyPart& part = parts[p];
    spec.parents[p] = part.parent;
    const Eigen::Vector3d axis = (part.end - part.start).normalized();
    const Eigen::Vector3d ref =
        std::abs(axis.y()) < 0.99 ? Eigen::Vector3d::UnitY() : Eigen::Vector3d::UnitX();
    const Eigen::Vector3d u = axis.cross(ref).normalized();
    const Eigen::Vector3d w = axis.cross(u);

    for (int r = 0; r < kRings; ++r) {
      const double t = static_cast<double>(r) / (kRings - 1);
      const Eigen::Vector3d center = part.start + t * (part.end - part.start);
      for (int m = 0; m < kRingVerts; ++m) {
        const int idx = p * kPartVerts + r * kRingVerts + m;
        spec.template_vertices.row(idx) =
            center + part.radius * (ring_c[m] * u + ring_s[m] * w);
        if (r == 0) {
          spec.joint_regressor(p, idx) = 1.0 / kRingVerts;
          spec.skinning_weights(idx, p) = 1.0;
        } else if (r == kRings - 1 && part.blend_child >= 0) {
          spec.skinning_weights(idx, p) = 0.5;
          spec.skinning_weights(idx, part.blend_child) = 0.5;
        } else {
          spec.skinning_weights(idx, p) = 1.0;
        }
      }
    }

    const int base = p * kPartVerts;
    auto ring_idx = [&](int r, int m) { return base + r * kRingVerts + (m % kRingVerts); };
    for (int r = 0; r + 1 < kRings; ++r) {
      for (int m = 0; m < kRingVerts; ++m) {
        const int a = ring_idx(r, m), b = ring_idx(r, m + 1);
        const int c = ring_idx(r + 1, m), d = ring_idx(r + 1, m + 1);
        spec.faces.push_back({a, b, c});
        spec.faces.push_back({b, d, c});
      }
    }
    for (int m = 1; m + 1 < kRingVerts; ++m) {  // end caps
      spec.faces.push_back({ring_idx(0, 0), ring_idx(0, m), ring_idx(0, m + 1)});
      spec.faces.push_back({ring_idx(kRings - 1, 0), ring_idx(kRings - 1, m + 1),
                            ring_idx(kRings - 1, m)});
    }
  }

  // Shape directions: global scalings, limb stretch, head size, smooth waves.
  const Eigen::Vector3d head_center(0.0, -0.75, 0.0);
  spec.shape_blendshapes.assign(kShapeDims, Points3::Zero(n, 3));
  for (int v = 0; v < n; ++v) {
    const Eigen::Vector3d q = spec.template_vertices.row(v);
    spec.shape_blendshapes[0].row(v) = Eigen::Vector3d(0.0, 0.12 * q.y(), 0.0);
    spec.shape_blendshapes[1].row(v) = Eigen::Vector3d(0.12 * q.x(), 0.0, 0.0);
    spec.shape_blendshapes[2].row(v) = Eigen::Vector3d(0.08 * q.x(), 0.0, 0.08 * q.z());
    const double arm = q.x() > 0.25 ? q.x() - 0.25 : (q.x() < -0.25 ? q.x() + 0.25 : 0.0);
    spec.shape_blendshapes[3].row(v) = Eigen::Vector3d(0.2 * arm, 0.0, 0.0);
    spec.shape_blendshapes[4].row(v) = Eigen::Vector3d(0.0, 0.0, 0.06 * q.y());
    const double head_w = std::exp(-(q - head_center).squaredNorm() / (2.0 * 0.12 * 0.12));
    spec.shape_blendshapes[5].row(v) = 0.5 * head_w * (q - head_center);
    for (int k = 6; k < kShapeDims; ++k) {
      const double phase = 0.7 * (k - 6);
      spec.shape_blendshapes[k].row(v) =
          0.04 * Eigen::Vector3d(std::sin(3.0 * q.y() + phase), std::sin(2.0 * q.x() - phase),
                                 std::cos(2.5 * q.y() + 0.5 * phase));
    }
  }
  // Remove any root motion so the regressed root stays pinned at the origin
  // for every shape coefficient.
  for (int k = 0; k < kShapeDims; ++k) {
    const Eigen::RowVector3d root_shift = spec.joint_regressor.row(0) * spec.shape_blendshapes[k];
    spec.shape_blendshapes[k].rowwise() -= root_shift;
  }

  validate_spec(spec);
  return spec;
}

// ---------------------------------------------------------------------------
// OBJ export/import
// ---------------------------------------------------------------------------

void write_obj(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  char line[128];
  for (Eigen::Index v = 0; v < mesh.vertices.rows(); ++v) {
    std::snprintf(line, sizeof(line), "v %.17g %.17g %.17g\n", mesh.vertices(v, 0),
                  mesh.vertices(v, 1), mesh.vertices(v, 2));
    out << line;
  }
  for (const auto& f : mesh.faces) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

Mesh read_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<Eigen::Vector3d> verts;
  std::vector<std::array<int, 3>> faces;
  std::string tag;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream is(line);
    if (!(is >> tag)) continue;
    if (tag == "v") {
      Eigen::Vector3d p;
      if (!(is >> p.x() >> p.y() >> p.z())) {
        throw SchemaError(path + ":" + std::to_string(line_no) + ": malformed vertex");
      }
      verts.push_back(p);
    } else if (tag == "f") {
      std::array<int, 3> f{};
      if (!(is >> f[0] >> f[1] >> f[2])) {
        throw SchemaError(path + ":" + std::to_string(line_no) + ": malformed face");
      }
      for (int& c : f) c -= 1;
      faces.push_back(f);
    }
  }
  Mesh mesh;
  mesh.vertices.resize(static_cast<Eigen::Index>(verts.size()), 3);
  for (size_t i = 0; i < verts.size(); ++i) mesh.vertices.row(static_cast<Eigen::Index>(i)) = verts[i];
  mesh.faces = std::move(faces);
  mesh.joints.resize(0, 3);
  return mesh;
}

}  // namespace camworld
