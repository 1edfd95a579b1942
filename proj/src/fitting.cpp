#include "camworld/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "camworld/errors.hpp"
#include "camworld/transform.hpp"

namespace camworld {

void validate_config(const FitConfig& cfg) {
  if (cfg.max_iters < 1) throw ValidationError("max_iters must be >= 1");
  if (!(cfg.pitch_grid_step > 0.0)) throw ValidationError("pitch grid step must be positive");
  if (!(cfg.pitch_grid_max >= cfg.pitch_grid_min)) {
    throw ValidationError("pitch grid range is empty");
  }
  if (!(cfg.grad_tol > 0.0) || !(cfg.pitch_refine_tol > 0.0) || !(cfg.min_step > 0.0)) {
    throw ValidationError("tolerances must be positive");
  }
  if (!(cfg.armijo_c > 0.0) || !(cfg.backtrack > 0.0) || !(cfg.backtrack < 1.0)) {
    throw ValidationError("line-search constants out of range");
  }
  validate_weights(cfg.weights);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Candidate pitches are integer multiples of the grid step inside the range,
// so 0 is always an exact node of symmetric ranges and +p/-p pair up exactly.
std::vector<double> pitch_grid(const FitConfig& cfg) {
  const double step = cfg.pitch_grid_step;
  const long lo = static_cast<long>(std::ceil(cfg.pitch_grid_min / step - 1e-9));
  const long hi = static_cast<long>(std::floor(cfg.pitch_grid_max / step + 1e-9));
  std::vector<double> grid;
  grid.reserve(static_cast<size_t>(std::max(0L, hi - lo + 1)));
  for (long i = lo; i <= hi; ++i) grid.push_back(static_cast<double>(i) * step);
  if (grid.empty()) grid.push_back(cfg.pitch_grid_min);
  return grid;
}

// Joint order used for all reductions inside estimate_pitch; sorting by value
// makes the result exactly invariant to permutations of the input rows.
std::vector<int> canonical_order(const Points3& joints, const Points2& keypoints) {
  std::vector<int> order(static_cast<size_t>(joints.rows()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (int c = 0; c < 2; ++c) {
      if (keypoints(a, c) != keypoints(b, c)) return keypoints(a, c) < keypoints(b, c);
    }
    for (int c = 0; c < 3; ++c) {
      if (joints(a, c) != joints(b, c)) return joints(a, c) < joints(b, c);
    }
    return false;
  });
  return order;
}

struct PitchScore {
  double score = kInf;
  Eigen::Vector3d t_b = Eigen::Vector3d::Zero();
  bool feasible = false;
};

// For a fixed pitch, solve for the offset minimizing point-to-ray residuals in
// the camera frame, then score by the exact mean squared pixel error.
PitchScore score_pitch(double pitch, const Points3& joints, const Points2& keypoints,
                       const Intrinsics& intr, const std::vector<int>& order) {
  const Eigen::Matrix3d r = pitch_rotation(pitch);
  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  for (int i : order) {
    Eigen::Vector3d dir((keypoints(i, 0) - intr.cx()) / intr.focal,
                        (keypoints(i, 1) - intr.cy()) / intr.focal, 1.0);
    dir.normalize();
    const Eigen::Matrix3d proj = Eigen::Matrix3d::Identity() - dir * dir.transpose();
    a += proj;
    b += proj * (r * Eigen::Vector3d(joints.row(i)));
  }
  PitchScore out;
  const Eigen::LDLT<Eigen::Matrix3d> solver(a);
  if (solver.info() != Eigen::Success) return out;
  out.t_b = solver.solve(b);

  double sum = 0.0;
  for (int i : order) {
    const Eigen::Vector3d q = r * Eigen::Vector3d(joints.row(i)) - out.t_b;
    if (!(q.z() > kMinViewDepth)) return out;  // infeasible candidate
    const Eigen::Vector2d px(intr.focal * q.x() / q.z() + intr.cx(),
                             intr.focal * q.y() / q.z() + intr.cy());
    sum += (px - Eigen::Vector2d(keypoints.row(i))).squaredNorm();
  }
  out.score = sum / static_cast<double>(order.size());
  out.feasible = true;
  return out;
}

}  // namespace

PitchEstimate estimate_pitch(const Points3& joints_world, const Points2& keypoints2d,
                             const Intrinsics& intr, const FitConfig& cfg) {
  validate_config(cfg);
  if (joints_world.rows() != keypoints2d.rows()) {
    throw ValidationError("estimate_pitch: joint/keypoint counts differ");
  }
  if (joints_world.rows() < 4) {
    throw FitError("estimate_pitch: need at least 4 joints");
  }
  const std::vector<int> order = canonical_order(joints_world, keypoints2d);

  int evals = 0;
  double best_pitch = 0.0;
  PitchScore best;
  for (double p : pitch_grid(cfg)) {
    const PitchScore s = score_pitch(p, joints_world, keypoints2d, intr, order);
    ++evals;
    if (s.feasible && s.score < best.score) {
      best = s;
      best_pitch = p;
    }
  }
  if (!best.feasible) {
    throw FitError("estimate_pitch: no feasible pitch candidate on the grid");
  }

  // Golden-section refinement around the winning grid node.
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = best_pitch - cfg.pitch_grid_step;
  double hi = best_pitch + cfg.pitch_grid_step;
  double x1 = hi - gr * (hi - lo);
  double x2 = lo + gr * (hi - lo);
  PitchScore s1 = score_pitch(x1, joints_world, keypoints2d, intr, order);
  PitchScore s2 = score_pitch(x2, joints_world, keypoints2d, intr, order);
  evals += 2;
  while (hi - lo > cfg.pitch_refine_tol) {
    if (s1.score <= s2.score) {
      hi = x2;
      x2 = x1;
      s2 = s1;
      x1 = hi - gr * (hi - lo);
      s1 = score_pitch(x1, joints_world, keypoints2d, intr, order);
    } else {
      lo = x1;
      x1 = x2;
      s1 = s2;
      x2 = lo + gr * (hi - lo);
      s2 = score_pitch(x2, joints_world, keypoints2d, intr, order);
    }
    ++evals;
  }
  for (const auto& cand : {std::pair{x1, s1}, std::pair{x2, s2}}) {
    if (cand.second.feasible && cand.second.score < best.score) {
      best = cand.second;
      best_pitch = cand.first;
    }
  }

  PitchEstimate out;
  out.pitch = best_pitch;
  out.t_b = best.t_b;
  out.report.initial_loss = best.score;
  out.report.final_loss = best.score;
  out.report.breakdown.l2d = best.score;
  out.report.breakdown.total = best.score;
  out.report.iterations = evals;
  out.report.converged = true;
  out.report.status = "converged";
  return out;
}

PitchDepthEstimate estimate_pitch_depth(const DepthMap& observed, const Mesh& world_mesh,
                                        const Intrinsics& intr, const Eigen::Vector3d& t_b,
                                        const FitConfig& cfg) {
  validate_config(cfg);
  if (observed.width != intr.width || observed.height != intr.height) {
    throw ValidationError("estimate_pitch_depth: observed depth resolution differs from camera");
  }
  if (observed.covered_count() == 0) {
    throw CameraError("estimate_pitch_depth: observed depth map has no coverage");
  }

  double best_score = kInf;
  double best_pitch = 0.0;
  bool feasible = false;
  int evals = 0;
  for (double p : pitch_grid(cfg)) {
    Extrinsics ext;
    ext.pitch = p;
    const DepthMap cand = render_depth(world_mesh, intr, ext, t_b);
    double sum = 0.0;
    int count = 0;
    for (size_t i = 0; i < cand.depth.size(); ++i) {
      if (std::isfinite(cand.depth[i]) && std::isfinite(observed.depth[i])) {
        sum += std::abs(cand.depth[i] - observed.depth[i]);
        ++count;
      }
    }
    ++evals;
    if (count == 0) continue;
    const double score = sum / count;
    if (score < best_score ||
        (score == best_score && std::abs(p) < std::abs(best_pitch))) {
      best_score = score;
      best_pitch = p;
      feasible = true;
    }
  }
  if (!feasible) {
    throw FitError("estimate_pitch_depth: no candidate shares coverage with the observation");
  }

  PitchDepthEstimate out;
  out.pitch = best_pitch;
  out.report.initial_loss = best_score;
  out.report.final_loss = best_score;
  out.report.iterations = evals;
  out.report.converged = true;
  out.report.status = "converged";
  return out;
}

namespace {

double try_loss(const BodyModelSpec& spec, const Eigen::VectorXd& x, int j, double pitch,
                const Eigen::Vector3d& t_b, const Intrinsics& intr, const FitTargets& targets,
                const LossWeights& w) {
  try {
    return loss_total(spec, unpack_params(x, j), pitch, t_b, intr, targets, w).total;
  } catch (const CameraError&) {
    return kInf;  // infeasible step; the line search will shrink
  }
}

}  // namespace

AdjustResult adjust_mesh(const BodyModelSpec& spec, const BodyParams& init_cam, double pitch,
                         const Intrinsics& intr, const Eigen::Vector3d& t_b,
                         const FitTargets& targets, const FitConfig& cfg) {
  validate_config(cfg);
  if (targets.keypoints2d.rows() == 0) {
    throw ValidationError("adjust_mesh: 2D keypoints are required");
  }
  const int j = spec.joint_count();
  const LossWeights& w = cfg.weights;

  Eigen::VectorXd x = pack_params(camera_to_world(init_cam, pitch));

  LossGradient cur;
  try {
    cur = loss_gradient(spec, unpack_params(x, j), pitch, t_b, intr, targets, w);
  } catch (const CameraError& e) {
    throw FitError(std::string("adjust_mesh: infeasible at init: ") + e.what());
  }
  if (!std::isfinite(cur.breakdown.total)) throw FitError("adjust_mesh: non-finite loss at init");

  AdjustResult out;
  out.report.initial_loss = cur.breakdown.total;
  out.report.loss_trace.push_back(cur.breakdown.total);

  double loss = cur.breakdown.total;
  const double init_step = cfg.init_step > 0.0 ? cfg.init_step : 1.0;
  int iters = 0;
  std::string status = "max_iters";

  while (iters < cfg.max_iters) {
    if (cur.grad.norm() <= cfg.grad_tol) {
      status = "converged";
      break;
    }
    // Precondition with the damped Gauss-Newton matrix; the 2D pixel term and
    // the metric terms differ by several orders of magnitude and plain
    // steepest descent cannot cross that valley in any sane iteration budget.
    // A unit step is then the Gauss-Newton step; Armijo keeps it monotone.
    const double damping = 1e-12 * cur.gn.diagonal().maxCoeff() + 1e-15;
    Eigen::MatrixXd h = cur.gn;
    h.diagonal().array() += damping;
    Eigen::VectorXd dir = Eigen::LDLT<Eigen::MatrixXd>(h).solve(cur.grad);
    double slope = cur.grad.dot(dir);
    if (!dir.allFinite() || !(slope > 0.0)) {
      // Indefinite or failed solve; fall back to diagonal rescaling.
      const double floor = std::max(1e-12, 1e-9 * cur.gn.diagonal().maxCoeff());
      dir = cur.grad.cwiseQuotient(cur.gn.diagonal().array().max(floor).matrix());
      slope = cur.grad.dot(dir);
    }

    double alpha = init_step;
    bool accepted = false;
    Eigen::VectorXd x_try;
    while (alpha >= cfg.min_step) {
      x_try = x - alpha * dir;
      const double loss_try = try_loss(spec, x_try, j, pitch, t_b, intr, targets, w);
      if (loss_try <= loss - cfg.armijo_c * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= cfg.backtrack;
    }
    if (!accepted) {
      status = "stalled";
      break;
    }

    cur = loss_gradient(spec, unpack_params(x_try, j), pitch, t_b, intr, targets, w);
    x = x_try;
    loss = cur.breakdown.total;
    ++iters;
    out.report.loss_trace.push_back(loss);
  }
  if (status == "max_iters" && iters >= cfg.max_iters) {
    // Gradient may still be above tolerance; report honestly.
    status = cur.grad.norm() <= cfg.grad_tol ? "converged" : "max_iters";
  }

  out.params_world = unpack_params(x, j);
  out.report.final_loss = loss;
  out.report.iterations = iters;
  out.report.breakdown = cur.breakdown;
  out.report.converged = status == "converged";
  out.report.status = status;
  return out;
}

}  // namespace camworld
