#include "scif/motion_model.hpp"

#include <cmath>
#include <numbers>

#include "scif/error.hpp"

namespace scif {

namespace {

double heading_of_travel(const Pose2& p, const Control& u) {
  return u.beta + p.theta() + 0.5 * u.delta_theta;
}

}  // namespace

void validate(const Control& u) {
  if (!(u.dt > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "control: dt must be positive");
  }
  if (!(std::abs(u.beta) < 0.5 * std::numbers::pi)) {
    throw Error(ErrorCode::kInvalidArgument,
                "control: steering angle outside (-pi/2, pi/2)");
  }
}

Pose2 evolve(const Pose2& p, const Control& u) {
  const double phi = heading_of_travel(p, u);
  return {p.x() + u.delta_d * std::cos(phi), p.y() + u.delta_d * std::sin(phi),
          p.theta() + u.delta_theta};
}

Mat3 jacobian_state(const Pose2& p, const Control& u) {
  const double phi = heading_of_travel(p, u);
  Mat3 g = Mat3::Identity();
  g(0, 2) = -u.delta_d * std::sin(phi);
  g(1, 2) = u.delta_d * std::cos(phi);
  return g;
}

Mat32 jacobian_control(const Pose2& p, const Control& u) {
  const double phi = heading_of_travel(p, u);
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  Mat32 g;
  g << c, -0.5 * u.delta_d * s,
       s, 0.5 * u.delta_d * c,
       0.0, 1.0;
  return g;
}

}  // namespace scif
