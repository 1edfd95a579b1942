#include "camworld/rotation.hpp"

#include <cmath>

#include <Eigen/Geometry>

namespace camworld {

namespace {
constexpr double kTaylorAngle = 1e-8;   // below this, sin/cos ratios go to series
constexpr double kJacSeriesAngle = 1e-4;  // derivative coefficients cancel badly below this
}  // namespace

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

Eigen::Matrix3d axis_angle_to_matrix(const Eigen::Vector3d& aa) {
  const double theta = aa.norm();
  const Eigen::Matrix3d w = skew(aa);
  if (theta < kTaylorAngle) {
    return Eigen::Matrix3d::Identity() + w + 0.5 * w * w;
  }
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Eigen::Matrix3d::Identity() + a * w + b * w * w;
}

Eigen::Vector3d matrix_to_axis_angle(const Eigen::Matrix3d& rotation) {
  const Eigen::AngleAxisd aa(rotation);
  return aa.angle() * aa.axis();
}

std::array<Eigen::Matrix3d, 3> axis_angle_jacobian(const Eigen::Vector3d& aa) {
  const double theta = aa.norm();
  const double theta2 = theta * theta;
  const Eigen::Matrix3d w = skew(aa);
  const Eigen::Matrix3d w2 = w * w;

  // R = I + a(theta) W + b(theta) W^2 with W unnormalized, so
  // dR/d aa_i = (a'/theta) aa_i W + a E_i + (b'/theta) aa_i W^2 + b (E_i W + W E_i).
  double a, b, da_over_theta, db_over_theta;
  if (theta < kJacSeriesAngle) {
    a = 1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0;
    b = 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0;
    da_over_theta = -1.0 / 3.0 + theta2 / 30.0;
    db_over_theta = -1.0 / 12.0 + theta2 / 180.0;
  } else {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    a = s / theta;
    b = (1.0 - c) / theta2;
    da_over_theta = (theta * c - s) / (theta2 * theta);
    db_over_theta = (theta * s - 2.0 * (1.0 - c)) / (theta2 * theta2);
  }

  std::array<Eigen::Matrix3d, 3> jac;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Matrix3d ei = skew(Eigen::Vector3d::Unit(i));
    jac[i] = da_over_theta * aa[i] * w + a * ei + db_over_theta * aa[i] * w2 +
             b * (ei * w + w * ei);
  }
  return jac;
}

double geodesic_angle(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  const Eigen::AngleAxisd rel(Eigen::Matrix3d(a.transpose() * b));
  return std::abs(rel.angle());
}

Eigen::Vector3d normalize_axis_angle(const Eigen::Vector3d& aa) {
  const double two_pi = 2.0 * M_PI;
  const double theta = aa.norm();
  if (theta < two_pi) return aa;
  const double wrapped = std::fmod(theta, two_pi);
  return aa * (wrapped / theta);
}

}  // namespace camworld
