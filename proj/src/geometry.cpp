#include "scif/geometry.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "scif/error.hpp"

namespace scif {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kNonFinite: return "non-finite value";
    case ErrorCode::kSingularInnovation: return "singular innovation covariance";
    case ErrorCode::kRangeSingularity: return "range linearization singularity";
    case ErrorCode::kUnknownTag: return "unknown tag";
    case ErrorCode::kNotInitializable: return "not initializable";
    case ErrorCode::kStaleMeasurement: return "stale measurement";
    case ErrorCode::kNonContiguousEpoch: return "non-contiguous epoch";
    case ErrorCode::kUnreachableWaypoint: return "unreachable waypoint";
    case ErrorCode::kEmptyInput: return "empty input";
    case ErrorCode::kLengthMismatch: return "length mismatch";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kIo: return "i/o error";
  }
  return "unknown error";
}

double wrap_angle(double theta) {
  if (!std::isfinite(theta)) {
    throw Error(ErrorCode::kNonFinite, "wrap_angle: non-finite angle");
  }
  constexpr double kPi = std::numbers::pi;
  double r = std::remainder(theta, 2.0 * kPi);  // [-pi, pi]
  if (r <= -kPi) r += 2.0 * kPi;
  if (r > kPi) r -= 2.0 * kPi;
  return r;
}

Pose2::Pose2(double x, double y, double theta)
    : x_(x), y_(y), theta_(wrap_angle(theta)) {}

Eigen::Matrix2d rotation(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

Pose2 compose(const Pose2& a, const Pose2& b) {
  const double c = std::cos(a.theta());
  const double s = std::sin(a.theta());
  return {a.x() + c * b.x() - s * b.y(), a.y() + s * b.x() + c * b.y(),
          a.theta() + b.theta()};
}

Pose2 inverse(const Pose2& a) {
  const double c = std::cos(a.theta());
  const double s = std::sin(a.theta());
  return {-c * a.x() - s * a.y(), s * a.x() - c * a.y(), -a.theta()};
}

Vec3 pose_difference(const Pose2& a, const Pose2& b) {
  return {a.x() - b.x(), a.y() - b.y(), wrap_angle(a.theta() - b.theta())};
}

Pose2 robot_pose_from_tag_detection(const Pose2& tag_global,
                                    const Pose2& tag_in_camera,
                                    const Pose2& camera_in_robot) {
  return compose(compose(tag_global, inverse(tag_in_camera)),
                 inverse(camera_in_robot));
}

Pose2 tag_in_camera_from_robot(const Pose2& robot_global,
                               const Pose2& tag_global,
                               const Pose2& camera_in_robot) {
  return compose(inverse(compose(robot_global, camera_in_robot)), tag_global);
}

Mat3 detection_jacobian(const Pose2& tag_global, const Pose2& tag_in_camera,
                        const Pose2& camera_in_robot) {
  // robot.xy = tag.xy - R(psi) * v,  psi = tag.th - cam.th - meas.th,
  // v = cam.xy + R(cam.th) * meas.xy,  robot.th = tag.th - cam.th - meas.th
  const double psi =
      tag_global.theta() - camera_in_robot.theta() - tag_in_camera.theta();
  const Eigen::Vector2d v = camera_in_robot.translation() +
                            rotation(camera_in_robot.theta()) *
                                tag_in_camera.translation();
  Eigen::Matrix2d perp;
  perp << 0.0, -1.0, 1.0, 0.0;

  Mat3 j = Mat3::Zero();
  j.block<2, 2>(0, 0) = -rotation(tag_global.theta() - tag_in_camera.theta());
  j.block<2, 1>(0, 2) = rotation(psi) * perp * v;
  j(2, 2) = -1.0;
  return j;
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

Eigen::MatrixXd floor_psd(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd s = symmetrize(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  if (es.eigenvalues().minCoeff() >= 0.0) return s;
  const Eigen::VectorXd clamped = es.eigenvalues().cwiseMax(0.0);
  return symmetrize(es.eigenvectors() * clamped.asDiagonal() *
                    es.eigenvectors().transpose());
}

bool is_symmetric(const Eigen::MatrixXd& m, double tol) {
  return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

bool is_psd(const Eigen::MatrixXd& m, double tol) {
  if (!is_symmetric(m, tol)) return false;
  if (m.size() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(m),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

}  // namespace scif
