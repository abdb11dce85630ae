#pragma once

#include <cstdint>
#include <variant>

#include <Eigen/Core>

#include "scif/geometry.hpp"
#include "scif/split_cif.hpp"
#include "scif/tag_map.hpp"

namespace scif {

struct CompleteDetection {
  Pose2 pose_in_camera;
};

struct DistanceOnlyDetection {
  double range = 0.0;  // robot-to-tag distance [m]
};

struct TagMeasurement {
  int tag_id = 0;
  std::int64_t stamp = 0;  // emission epoch
  std::variant<CompleteDetection, DistanceOnlyDetection> payload;
  double view_distance = 1.0;  // L [m]
  double view_angle = 0.5;     // alpha: camera axis vs tag normal [rad]

  bool is_complete() const {
    return std::holds_alternative<CompleteDetection>(payload);
  }
};

/// Throws Error(kInvalidArgument) when range/view distance are not positive
/// or view_angle is outside (0, pi/2].
void validate(const TagMeasurement& meas);

enum class ScreeningDecision { kAccept, kSoftAccept, kDiscard };

const char* to_string(ScreeningDecision d);

struct ScreeningConfig {
  double soft_threshold = 0.5;  // [m]
  double hard_threshold = 3.0;  // [m]
  double angle_weight = 1.0;    // [m/rad] inside the residual norm
};

/// Standard deviation of a complete detection in the camera frame as a
/// function of view distance and view angle:
/// sigma = base * (1 + growth_distance * L) * (1 + growth_angle * alpha).
struct DetectionNoiseModel {
  double base_sigma_xy = 0.01;
  double base_sigma_theta = 0.005;
  double growth_distance = 0.1;
  double growth_angle = 0.5;

  double scale(double view_distance, double view_angle) const {
    return (1.0 + growth_distance * view_distance) *
           (1.0 + growth_angle * view_angle);
  }
  double sigma_xy(double l, double a) const { return base_sigma_xy * scale(l, a); }
  double sigma_theta(double l, double a) const {
    return base_sigma_theta * scale(l, a);
  }
};

/// Robot pose measurement (x, y, theta) with H = I implied by a complete
/// detection. Throws Error(kUnknownTag) if the tag is not in the map and
/// Error(kInvalidArgument) for a distance-only payload.
LinearMeasurement complete_measurement(const TagMeasurement& meas,
                                       const TagMap& map,
                                       const Pose2& extrinsics);

/// Nominal covariance of complete_measurement's z: the camera-frame detection
/// noise pushed through the detection Jacobian.
Mat3 nominal_pose_covariance(const TagMeasurement& meas, const TagMap& map,
                             const Pose2& extrinsics,
                             const DetectionNoiseModel& model);

/// sqrt(dx^2 + dy^2 + (w * dtheta)^2) with the angle difference wrapped.
double screening_residual(const Pose2& predicted, const Vec3& z,
                          double angle_weight = 1.0);

ScreeningDecision screen(const Pose2& predicted, const Vec3& z,
                         double threshold_hard, double threshold_soft,
                         double angle_weight = 1.0);

struct AdaptiveNoiseConfig {
  double angle_weight = 1.0;         // theta diagonal relative to x/y
  double dependent_fraction = 0.0;   // share routed to r_dep
  double r_min = 1e-4;               // diagonal floor
};

/// Scalar outlier-adaptive variance 0.25 * (L / alpha^2) * |residual|.
double adaptive_scale(double residual_norm, double view_distance,
                      double view_angle);

SplitNoise adaptive_noise(const Pose2& predicted, const Vec3& z,
                          double view_distance, double view_angle,
                          const AdaptiveNoiseConfig& cfg = {},
                          double screening_angle_weight = 1.0);

struct RangeLinearization {
  Eigen::RowVector3d h;       // [C S 0]
  double z_tilde = 0.0;       // z - D + C x~ + S y~
  double predicted_range = 0.0;  // D

  LinearMeasurement as_measurement() const;
};

/// First-order expansion of the robot-to-tag distance about the predicted
/// position. Throws Error(kRangeSingularity) when D < d_min.
RangeLinearization linearize_distance(const Pose2& predicted,
                                      const Eigen::Vector2d& tag_xy,
                                      double z_range, double d_min = 0.1);

}  // namespace scif
