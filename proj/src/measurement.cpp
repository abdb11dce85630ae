#include "scif/measurement.hpp"

#include <cmath>
#include <numbers>

#include "scif/error.hpp"

namespace scif {

const char* to_string(ScreeningDecision d) {
  switch (d) {
    case ScreeningDecision::kAccept: return "accept";
    case ScreeningDecision::kSoftAccept: return "soft";
    case ScreeningDecision::kDiscard: return "discard";
  }
  return "?";
}

void validate(const TagMeasurement& meas) {
  if (!(meas.view_distance > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "measurement: view distance must be positive");
  }
  if (!(meas.view_angle > 0.0 && meas.view_angle <= 0.5 * std::numbers::pi)) {
    throw Error(ErrorCode::kInvalidArgument, "measurement: view angle outside (0, pi/2]");
  }
  if (const auto* d = std::get_if<DistanceOnlyDetection>(&meas.payload)) {
    if (!(d->range > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "measurement: range must be positive");
    }
  }
}

LinearMeasurement complete_measurement(const TagMeasurement& meas,
                                       const TagMap& map,
                                       const Pose2& extrinsics) {
  const auto* det = std::get_if<CompleteDetection>(&meas.payload);
  if (det == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "complete_measurement: distance-only payload");
  }
  const Pose2 robot =
      robot_pose_from_tag_detection(map.at(meas.tag_id), det->pose_in_camera, extrinsics);
  return {robot.vector(), Eigen::MatrixXd::Identity(3, 3), {2}};
}

Mat3 nominal_pose_covariance(const TagMeasurement& meas, const TagMap& map,
                             const Pose2& extrinsics,
                             const DetectionNoiseModel& model) {
  const auto& det = std::get<CompleteDetection>(meas.payload);
  const Mat3 j = detection_jacobian(map.at(meas.tag_id), det.pose_in_camera, extrinsics);
  const double sxy = model.sigma_xy(meas.view_distance, meas.view_angle);
  const double sth = model.sigma_theta(meas.view_distance, meas.view_angle);
  const Vec3 var(sxy * sxy, sxy * sxy, sth * sth);
  return symmetrize(j * var.asDiagonal() * j.transpose());
}

double screening_residual(const Pose2& predicted, const Vec3& z, double angle_weight) {
  const double dx = z.x() - predicted.x();
  const double dy = z.y() - predicted.y();
  const double dth = angle_weight * wrap_angle(z.z() - predicted.theta());
  return std::sqrt(dx * dx + dy * dy + dth * dth);
}

ScreeningDecision screen(const Pose2& predicted, const Vec3& z,
                         double threshold_hard, double threshold_soft,
                         double angle_weight) {
  if (!(threshold_soft > 0.0 && threshold_soft < threshold_hard)) {
    throw Error(ErrorCode::kInvalidArgument, "screen: need 0 < soft < hard");
  }
  const double d = screening_residual(predicted, z, angle_weight);
  if (d > threshold_hard) return ScreeningDecision::kDiscard;
  if (d > threshold_soft) return ScreeningDecision::kSoftAccept;
  return ScreeningDecision::kAccept;
}

double adaptive_scale(double residual_norm, double view_distance, double view_angle) {
  if (!(view_distance > 0.0 && view_angle > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "adaptive noise: L and alpha must be positive");
  }
  return 0.25 * (view_distance / (view_angle * view_angle)) * residual_norm;
}

SplitNoise adaptive_noise(const Pose2& predicted, const Vec3& z,
                          double view_distance, double view_angle,
                          const AdaptiveNoiseConfig& cfg,
                          double screening_angle_weight) {
  const double s = adaptive_scale(
      screening_residual(predicted, z, screening_angle_weight), view_distance, view_angle);
  const Vec3 diag(s, s, s * cfg.angle_weight);
  const Eigen::MatrixXd r = diag.asDiagonal();
  SplitNoise out = SplitNoise::with_share(r, cfg.dependent_fraction);
  out.r_ind += cfg.r_min * Eigen::MatrixXd::Identity(3, 3);
  return out;
}

LinearMeasurement RangeLinearization::as_measurement() const {
  LinearMeasurement m;
  m.z = Eigen::VectorXd::Constant(1, z_tilde);
  m.h = h;
  return m;
}

RangeLinearization linearize_distance(const Pose2& predicted,
                                      const Eigen::Vector2d& tag_xy,
                                      double z_range, double d_min) {
  const Eigen::Vector2d delta = predicted.translation() - tag_xy;
  const double d = delta.norm();
  if (d < d_min) {
    throw Error(ErrorCode::kRangeSingularity,
                "linearize_distance: predicted position too close to tag");
  }
  RangeLinearization lin;
  const double c = delta.x() / d;
  const double s = delta.y() / d;
  lin.h << c, s, 0.0;
  lin.z_tilde = z_range - d + c * predicted.x() + s * predicted.y();
  lin.predicted_range = d;
  return lin;
}

}  // namespace scif
