#pragma once

#include <Eigen/Core>

namespace scif {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

/// Maps an angle onto (-pi, pi]. Throws Error(kNonFinite) on NaN/inf.
double wrap_angle(double theta);

/// Planar pose. The heading is kept in (-pi, pi] by every constructor.
class Pose2 {
 public:
  Pose2() = default;
  Pose2(double x, double y, double theta);
  explicit Pose2(const Vec3& v) : Pose2(v.x(), v.y(), v.z()) {}

  static Pose2 identity() { return {}; }

  double x() const { return x_; }
  double y() const { return y_; }
  double theta() const { return theta_; }

  Eigen::Vector2d translation() const { return {x_, y_}; }
  Vec3 vector() const { return {x_, y_, theta_}; }

 private:
  double x_ = 0.0;
  double y_ = 0.0;
  double theta_ = 0.0;
};

Eigen::Matrix2d rotation(double theta);

/// a * b: express b (given in a's frame) in a's parent frame.
Pose2 compose(const Pose2& a, const Pose2& b);
Pose2 inverse(const Pose2& a);

/// (a - b) with the heading component wrapped; used for every pose residual.
Vec3 pose_difference(const Pose2& a, const Pose2& b);

/// Global robot pose implied by a tag detection:
/// tag_global * inverse(tag_in_camera) * inverse(camera_in_robot).
Pose2 robot_pose_from_tag_detection(const Pose2& tag_global,
                                    const Pose2& tag_in_camera,
                                    const Pose2& camera_in_robot);

/// Inverse of the above: where the tag appears in the camera for a known
/// robot pose. Used by the simulator and round-trip checks.
Pose2 tag_in_camera_from_robot(const Pose2& robot_global,
                               const Pose2& tag_global,
                               const Pose2& camera_in_robot);

/// d(robot pose)/d(tag_in_camera) for robot_pose_from_tag_detection.
Mat3 detection_jacobian(const Pose2& tag_global, const Pose2& tag_in_camera,
                        const Pose2& camera_in_robot);

// Covariance helpers. Every covariance in the library is a symmetric PSD 3x3
// (or m x m) matrix; these keep it that way after arithmetic.
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m);
/// Symmetrizes and clamps negative eigenvalues to zero.
Eigen::MatrixXd floor_psd(const Eigen::MatrixXd& m);
bool is_psd(const Eigen::MatrixXd& m, double tol = 1e-9);
bool is_symmetric(const Eigen::MatrixXd& m, double tol = 1e-9);

}  // namespace scif
