#pragma once

#include "scif/measurement.hpp"
#include "scif/split_cif.hpp"

namespace scif {

struct InitConfig {
  Mat3 p0 = Vec3(0.04, 0.04, 0.01).asDiagonal();  // all independent
  int kidnap_discard_limit = 5;                     // N consecutive discards
};

/// Start (or restart) tracking from a complete detection: mean is the robot
/// pose the detection implies, p_ind = p0, p_dep = 0, epoch = meas.stamp.
/// Throws Error(kNotInitializable) for a distance-only payload and
/// Error(kUnknownTag) for a tag outside the map.
SplitState init_from_measurement(const TagMeasurement& meas, const TagMap& map,
                                 const Pose2& extrinsics, const InitConfig& cfg);

enum class TrackingState { kTracking, kReinitializing };

/// Counts consecutive discarded detections and requests re-initialization
/// after `limit` of them in a row.
class KidnapMonitor {
 public:
  explicit KidnapMonitor(int limit = 5);

  /// Returns true exactly when this decision triggers re-initialization.
  bool observe_decision(ScreeningDecision d);
  /// Called once a re-initialization has consumed a detection.
  void mark_initialized();

  int consecutive_discards() const { return consecutive_discards_; }
  TrackingState state() const { return state_; }
  int limit() const { return limit_; }

 private:
  int limit_;
  int consecutive_discards_ = 0;
  TrackingState state_ = TrackingState::kTracking;
};

}  // namespace scif
