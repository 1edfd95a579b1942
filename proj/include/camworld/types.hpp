#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>

namespace camworld {

using Points3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using Points2 = Eigen::Matrix<double, Eigen::Dynamic, 2>;

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Wraps an angle to (-pi, pi]. In-range values pass through bitwise.
inline double normalize_angle(double a) {
  if (a > -std::numbers::pi && a <= std::numbers::pi) return a;
  const double two_pi = 2.0 * std::numbers::pi;
  double x = std::fmod(a + std::numbers::pi, two_pi);
  if (x <= 0.0) x += two_pi;
  return x - std::numbers::pi;
}

}  // namespace camworld
