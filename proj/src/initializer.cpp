#include "scif/initializer.hpp"

#include "scif/error.hpp"

namespace scif {

SplitState init_from_measurement(const TagMeasurement& meas, const TagMap& map,
                                 const Pose2& extrinsics, const InitConfig& cfg) {
  const auto* det = std::get_if<CompleteDetection>(&meas.payload);
  if (det == nullptr) {
    throw Error(ErrorCode::kNotInitializable,
                "initialization needs a complete detection");
  }
  SplitState s;
  s.mean = robot_pose_from_tag_detection(map.at(meas.tag_id), det->pose_in_camera,
                                         extrinsics);
  s.p_ind = cfg.p0;
  s.p_dep = Mat3::Zero();
  s.epoch = meas.stamp;
  return s;
}

KidnapMonitor::KidnapMonitor(int limit) : limit_(limit) {
  if (limit_ < 1) {
    throw Error(ErrorCode::kInvalidArgument, "kidnap monitor: limit must be >= 1");
  }
}

bool KidnapMonitor::observe_decision(ScreeningDecision d) {
  if (d != ScreeningDecision::kDiscard) {
    consecutive_discards_ = 0;
    return false;
  }
  ++consecutive_discards_;
  if (state_ == TrackingState::kTracking && consecutive_discards_ >= limit_) {
    state_ = TrackingState::kReinitializing;
    return true;
  }
  return false;
}

void KidnapMonitor::mark_initialized() {
  consecutive_discards_ = 0;
  state_ = TrackingState::kTracking;
}

}  // namespace scif
