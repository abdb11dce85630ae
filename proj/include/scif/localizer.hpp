#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "scif/delay.hpp"
#include "scif/initializer.hpp"
#include "scif/measurement.hpp"
#include "scif/motion_model.hpp"
#include "scif/split_cif.hpp"
#include "scif/tag_map.hpp"

namespace scif {

/// Comparison methods; names follow the ablation table labels.
enum class Method { kTagSlam, kEkfFull, kScifNonMA, kScifNonP, kScifNonBP, kScifFull };

inline constexpr std::array<Method, 6> kAllMethods = {
    Method::kTagSlam,  Method::kEkfFull,   Method::kScifNonMA,
    Method::kScifNonP, Method::kScifNonBP, Method::kScifFull};

std::string_view method_name(Method m);
std::optional<Method> parse_method(std::string_view name);
/// Comma-separated list of every valid method name.
std::string valid_method_names();

struct MethodFlags {
  bool fusion = true;           // false: per-epoch detection poses only
  bool split = true;            // false: p_dep and r_dep forced to zero
  bool adaptive = true;         // soft-accepted detections get the adaptive noise
  bool partial = true;          // fuse distance-only detections
  bool back_projection = true;  // fuse late detections at their stamp
};

MethodFlags flags_for(Method m);

struct LocalizerConfig {
  Pose2 extrinsics;  // camera in robot frame
  ProcessNoiseConfig process;
  InitConfig init;
  ScreeningConfig screening;
  AdaptiveNoiseConfig adaptive;
  DetectionNoiseModel detection_noise;  // nominal R of complete detections
  double range_sigma = 0.05;            // distance-only noise [m]
  double dependent_share = 0.64;        // r_dep / R for split methods
  double range_d_min = 0.1;
  std::size_t history_capacity = HistoryBuffer::kDefaultCapacity;
};

struct FusionCounters {
  std::int64_t accepted = 0;
  std::int64_t soft_accepted = 0;
  std::int64_t discarded = 0;
  std::int64_t partial_fused = 0;
  std::int64_t ignored = 0;  // method does not use the payload
  std::int64_t unknown_tag = 0;
  std::int64_t stale = 0;
  std::int64_t singular = 0;
  std::int64_t reinitializations = 0;
};

struct EpochEstimate {
  std::int64_t epoch = 0;
  std::optional<SplitState> state;  // empty: no estimate at this epoch
  bool reliable = true;              // false while waiting to re-initialize
  bool reinitialized = false;
};

/// Online localizer for one method. Feed epochs in order.
class Localizer {
 public:
  Localizer(Method method, LocalizerConfig config, TagMap map);

  /// Advances to `epoch`. `odometry` is the control from epoch - 1 (absent at
  /// the first epoch); `arrivals` are the detections delivered this epoch, in
  /// delivery order. Arrivals sharing a stamp are screened individually and
  /// fused in one stacked update.
  EpochEstimate step(std::int64_t epoch, const std::optional<Control>& odometry,
                     std::span<const TagMeasurement> arrivals);

  Method method() const { return method_; }
  const FusionCounters& counters() const { return counters_; }
  const HistoryBuffer& history() const { return history_; }
  TrackingState tracking_state() const { return monitor_.state(); }

 private:
  EpochEstimate step_detection_only(std::int64_t epoch,
                                    std::span<const TagMeasurement> arrivals);
  struct Prepared {
    LinearMeasurement z;
    SplitNoise noise;
  };
  SplitState update(const SplitState& state, std::span<const TagMeasurement> group,
                    FusionPass pass);
  std::optional<Prepared> prepare_complete(const SplitState& state, const TagMeasurement& meas,
                                           FusionPass pass);
  std::optional<Prepared> prepare_distance(const SplitState& state, const TagMeasurement& meas,
                                           FusionPass pass);
  SplitNoise split_of(const Eigen::MatrixXd& r) const;
  void initialize(std::int64_t epoch, const TagMeasurement& meas);

  Method method_;
  MethodFlags flags_;
  LocalizerConfig cfg_;
  TagMap map_;
  HistoryBuffer history_;
  KidnapMonitor monitor_;
  bool initialized_ = false;
  std::deque<std::pair<std::int64_t, Control>> controls_;  // odometry into epoch
  FusionCounters counters_;
};

}  // namespace scif
