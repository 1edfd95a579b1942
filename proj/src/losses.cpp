#include "camworld/losses.hpp"

#include <cmath>
#include <string>

#include "camworld/errors.hpp"

namespace camworld {

void validate_weights(const LossWeights& w) {
  const double all[] = {w.l2d, w.l3d, w.lv, w.lmix, w.lroot, w.lalpha, w.lgamma};
  for (double v : all) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValidationError("loss weights must be finite and non-negative");
    }
  }
}

double loss_cam(double pred_pitch, double pred_roll, double gt_pitch, double gt_roll,
                const LossWeights& w) {
  const double da = pred_pitch - gt_pitch;
  const double dg = pred_roll - gt_roll;
  return w.lalpha * da * da + w.lgamma * dg * dg;
}

namespace {

double mean_squared_distance(const Points3& a, const Points3& b, const char* what) {
  if (a.rows() != b.rows() || a.rows() == 0) {
    throw ValidationError(std::string(what) + ": point sets must match and be non-empty");
  }
  return (a - b).rowwise().squaredNorm().mean();
}

}  // namespace

double loss_3d(const Points3& pred_joints, const Points3& gt_joints) {
  return mean_squared_distance(pred_joints, gt_joints, "loss_3d");
}

double loss_vertex(const Points3& pred_verts, const Points3& gt_verts) {
  return mean_squared_distance(pred_verts, gt_verts, "loss_vertex");
}

double loss_2d(const Points3& pred_joints_world, const Points2& gt_keypoints,
               const Intrinsics& intr, double pitch, const Eigen::Vector3d& t_b) {
  if (pred_joints_world.rows() != gt_keypoints.rows() || pred_joints_world.rows() == 0) {
    throw ValidationError("loss_2d: joint/keypoint counts must match and be non-empty");
  }
  const Eigen::Matrix3d r = pitch_rotation(pitch);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < pred_joints_world.rows(); ++i) {
    const auto px = try_project_point(pred_joints_world.row(i), intr, r, t_b);
    if (!px) {
      throw CameraError("loss_2d: joint " + std::to_string(i) + " is behind the camera");
    }
    sum += (*px - Eigen::Vector2d(gt_keypoints.row(i))).squaredNorm();
  }
  return sum / static_cast<double>(pred_joints_world.rows());
}

double loss_mix(const std::vector<Eigen::Vector3d>& pred_pose,
                const std::vector<Eigen::Vector3d>& gt_pose, double lroot) {
  if (pred_pose.size() != gt_pose.size() || pred_pose.empty()) {
    throw ValidationError("loss_mix: pose vectors must match and be non-empty");
  }
  double full = 0.0;
  for (size_t i = 0; i < pred_pose.size(); ++i) {
    full += (pred_pose[i] - gt_pose[i]).squaredNorm();
  }
  const double root = (pred_pose[0] - gt_pose[0]).squaredNorm();
  return lroot * root + full;
}

namespace {

struct TermFlags {
  bool use_2d, use_3d, use_v, use_mix;
};

TermFlags active_terms(const FitTargets& t, const LossWeights& w) {
  TermFlags f;
  f.use_2d = w.l2d > 0.0 && t.keypoints2d.rows() > 0;
  f.use_3d = w.l3d > 0.0 && t.joints3d.has_value();
  f.use_v = w.lv > 0.0 && t.vertices.has_value();
  f.use_mix = w.lmix > 0.0 && t.pose.has_value();
  return f;
}

}  // namespace

LossBreakdown loss_total(const BodyModelSpec& spec, const BodyParams& params_world, double pitch,
                         const Eigen::Vector3d& t_b, const Intrinsics& intr,
                         const FitTargets& targets, const LossWeights& w) {
  validate_weights(w);
  const TermFlags f = active_terms(targets, w);
  const Mesh mesh = lbs_forward(spec, params_world);

  LossBreakdown out;
  if (f.use_2d) out.l2d = loss_2d(mesh.joints, targets.keypoints2d, intr, pitch, t_b);
  if (f.use_3d) out.l3d = loss_3d(mesh.joints, *targets.joints3d);
  if (f.use_v) out.lv = loss_vertex(mesh.vertices, *targets.vertices);
  if (f.use_mix) out.lmix = loss_mix(params_world.pose, *targets.pose, w.lroot);
  out.total = w.l2d * out.l2d + w.l3d * out.l3d + w.lv * out.lv + w.lmix * out.lmix;
  return out;
}

LossGradient loss_gradient(const BodyModelSpec& spec, const BodyParams& params_world,
                           double pitch, const Eigen::Vector3d& t_b, const Intrinsics& intr,
                           const FitTargets& targets, const LossWeights& w) {
  validate_weights(w);
  const TermFlags f = active_terms(targets, w);
  const int j = spec.joint_count();
  const int n = spec.vertex_count();
  const int p_total = lbs_param_count(j);

  const LbsResult lbs = lbs_forward_with_jacobian(spec, params_world);
  const Points3& joints = lbs.mesh.joints;

  LossGradient out;
  out.grad = Eigen::VectorXd::Zero(p_total);
  out.gn = Eigen::MatrixXd::Zero(p_total, p_total);

  if (f.use_2d) {
    if (targets.keypoints2d.rows() != j) {
      throw ValidationError("grad_loss_total: keypoint count must equal joint count");
    }
    const Eigen::Matrix3d r = pitch_rotation(pitch);
    const double scale = 2.0 * w.l2d / static_cast<double>(j);
    double sum = 0.0;
    for (int k = 0; k < j; ++k) {
      const Eigen::Vector3d q = to_camera_frame(joints.row(k), r, t_b);
      if (!(q.z() > kMinViewDepth)) {
        throw CameraError("grad_loss_total: joint " + std::to_string(k) +
                          " is behind the camera");
      }
      const Eigen::Vector2d px(intr.focal * q.x() / q.z() + intr.cx(),
                               intr.focal * q.y() / q.z() + intr.cy());
      const Eigen::Vector2d err = px - Eigen::Vector2d(targets.keypoints2d.row(k));
      sum += err.squaredNorm();
      Eigen::Matrix<double, 2, 3> dpix;
      const double inv_z = 1.0 / q.z();
      dpix << intr.focal * inv_z, 0.0, -intr.focal * q.x() * inv_z * inv_z, 0.0,
          intr.focal * inv_z, -intr.focal * q.y() * inv_z * inv_z;
      // d pixel / d params = dpix * R * d joint / d params
      const Eigen::MatrixXd jac = dpix * r * lbs.d_joints.middleRows(3 * k, 3);
      out.grad += scale * (err.transpose() * jac).transpose();
      out.gn.noalias() += scale * jac.transpose() * jac;
    }
    out.breakdown.l2d = sum / static_cast<double>(j);
  }

  if (f.use_3d) {
    const Points3& gt = *targets.joints3d;
    if (gt.rows() != j) throw ValidationError("grad_loss_total: 3d target size mismatch");
    const double scale = 2.0 * w.l3d / static_cast<double>(j);
    double sum = 0.0;
    for (int k = 0; k < j; ++k) {
      const Eigen::Vector3d err = joints.row(k) - gt.row(k);
      sum += err.squaredNorm();
      out.grad += scale * (err.transpose() * lbs.d_joints.middleRows(3 * k, 3)).transpose();
    }
    out.gn.noalias() += scale * lbs.d_joints.transpose() * lbs.d_joints;
    out.breakdown.l3d = sum / static_cast<double>(j);
  }

  if (f.use_v) {
    const Points3& gt = *targets.vertices;
    if (gt.rows() != n) throw ValidationError("grad_loss_total: vertex target size mismatch");
    const double scale = 2.0 * w.lv / static_cast<double>(n);
    double sum = 0.0;
    for (int v = 0; v < n; ++v) {
      const Eigen::Vector3d err = lbs.mesh.vertices.row(v) - gt.row(v);
      sum += err.squaredNorm();
      out.grad += scale * (err.transpose() * lbs.d_vertices.middleRows(3 * v, 3)).transpose();
    }
    out.gn.noalias() += scale * lbs.d_vertices.transpose() * lbs.d_vertices;
    out.breakdown.lv = sum / static_cast<double>(n);
  }

  if (f.use_mix) {
    const auto& gt = *targets.pose;
    if (static_cast<int>(gt.size()) != j) {
      throw ValidationError("grad_loss_total: pose target size mismatch");
    }
    out.breakdown.lmix = loss_mix(params_world.pose, gt, w.lroot);
    for (int k = 0; k < j; ++k) {
      const Eigen::Vector3d err = params_world.pose[k] - gt[k];
      const double coeff = k == 0 ? 2.0 * (1.0 + w.lroot) : 2.0;
      out.grad.segment<3>(3 * k) += w.lmix * coeff * err;
      out.gn.diagonal().segment<3>(3 * k).array() += w.lmix * coeff;
    }
  }

  out.breakdown.total = w.l2d * out.breakdown.l2d + w.l3d * out.breakdown.l3d +
                        w.lv * out.breakdown.lv + w.lmix * out.breakdown.lmix;
  if (!std::isfinite(out.breakdown.total)) throw FitError("grad_loss_total: non-finite loss");
  return out;
}

std::pair<LossBreakdown, Eigen::VectorXd> grad_loss_total(
    const BodyModelSpec& spec, const BodyParams& params_world, double pitch,
    const Eigen::Vector3d& t_b, const Intrinsics& intr, const FitTargets& targets,
    const LossWeights& w) {
  LossGradient g = loss_gradient(spec, params_world, pitch, t_b, intr, targets, w);
  return {g.breakdown, std::move(g.grad)};
}

Eigen::VectorXd pack_params(const BodyParams& params) {
  const int j = static_cast<int>(params.pose.size());
  Eigen::VectorXd x(lbs_param_count(j));
  for (int k = 0; k < j; ++k) x.segment<3>(3 * k) = params.pose[k];
  x.segment(3 * j, kShapeDims) = params.shape;
  x.segment<3>(3 * j + kShapeDims) = params.translation;
  return x;
}

BodyParams unpack_params(const Eigen::VectorXd& x, int joint_count) {
  if (x.size() != lbs_param_count(joint_count)) {
    throw ValidationError("unpack_params: vector size does not match joint count");
  }
  BodyParams p;
  p.pose.resize(joint_count);
  for (int k = 0; k < joint_count; ++k) p.pose[k] = x.segment<3>(3 * k);
  p.shape = x.segment(3 * joint_count, kShapeDims);
  p.translation = x.segment<3>(3 * joint_count + kShapeDims);
  return p;
}

}  // namespace camworld
