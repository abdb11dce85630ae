#pragma once

#include <Eigen/Core>

#include "scif/geometry.hpp"

namespace scif {

/// One motion epoch of forklift odometry.
struct Control {
  double delta_d = 0.0;      // v * dt [m]
  double delta_theta = 0.0;  // yaw rate * dt [rad]
  double beta = 0.0;         // front-wheel steering angle [rad]
  double dt = 0.05;          // [s]
};

/// Throws Error(kInvalidArgument) unless dt > 0 and |beta| < pi/2.
void validate(const Control& u);

using Mat32 = Eigen::Matrix<double, 3, 2>;
using Mat2 = Eigen::Matrix2d;

/// Process noise in control space (delta_d, delta_theta) plus the additive
/// model-error floor on the independent covariance.
struct ProcessNoiseConfig {
  Mat2 q = Mat2::Zero();
  Mat3 p_pre_ind = Mat3::Zero();
};

// Discrete forklift kinematics:
//   x' = x + dd cos(beta + th + dth/2)
//   y' = y + dd sin(beta + th + dth/2)
//   th' = th + dth
Pose2 evolve(const Pose2& p, const Control& u);

/// d evolve / d(x, y, theta)
Mat3 jacobian_state(const Pose2& p, const Control& u);

/// d evolve / d(delta_d, delta_theta); beta is treated as exactly known.
Mat32 jacobian_control(const Pose2& p, const Control& u);

}  // namespace scif
