#pragma once

#include <array>

#include <Eigen/Core>

namespace camworld {

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

/// Rodrigues' formula; Taylor fallback below 1e-8 rad.
Eigen::Matrix3d axis_angle_to_matrix(const Eigen::Vector3d& axis_angle);

/// Inverse of the above; returned magnitude is in [0, pi].
Eigen::Vector3d matrix_to_axis_angle(const Eigen::Matrix3d& rotation);

/// dR/d(axis_angle[i]) for the unnormalized axis-angle parameterization.
std::array<Eigen::Matrix3d, 3> axis_angle_jacobian(const Eigen::Vector3d& axis_angle);

/// Angle of Ra^T * Rb, radians in [0, pi].
double geodesic_angle(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b);

/// Rescales the axis-angle so its magnitude lands in [0, 2*pi); the rotation
/// it encodes is unchanged.
Eigen::Vector3d normalize_axis_angle(const Eigen::Vector3d& axis_angle);

}  // namespace camworld
