#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "scif/localizer.hpp"
#include "scif/map_builder.hpp"
#include "scif/measurement.hpp"
#include "scif/motion_model.hpp"
#include "scif/tag_map.hpp"

namespace scif::sim {

/// Turn-then-drive path following: rotate towards the next waypoint at
/// turn_rate (creeping forward at turn_speed), then drive straight at speed.
struct MotionProfile {
  double speed = 1.0;       // [m/s]
  double turn_rate = 0.8;   // [rad/s]
  double turn_speed = 0.0;  // forward speed while turning [m/s]
};

struct SensorModel {
  Pose2 extrinsics{0.2, 0.0, 1.5707963267948966};  // camera looking left
  double fov_half_angle = 0.6;
  double max_range = 6.0;
  double min_range = 0.3;
  double min_view_angle = 0.02;
  DetectionNoiseModel noise;
  double ar1_rho = 0.0;  // frame-to-frame correlation of detection noise
  double partial_base = 0.0;
  double partial_per_meter = 0.0;
  double partial_per_radian = 0.0;
  double outlier_rate = 0.0;
  double outlier_magnitude = 1.0;  // [m]
  double outlier_angle = 0.2;      // max heading corruption [rad]
  int frame_period = 2;            // epochs between camera frames

  double partial_probability(double view_distance, double view_angle) const;
};

struct KidnapEvent {
  std::int64_t epoch = 0;
  Pose2 offset;  // world-frame (dx, dy, dtheta)
};

struct DelayWindow {
  std::int64_t start = 0;
  std::int64_t end = 0;  // exclusive
  std::int64_t delay = 0;
};

struct OutlierBurst {
  std::int64_t start = 0;
  std::int64_t end = 0;
  double rate = 0.0;
};

using ScenarioEvent = std::variant<KidnapEvent, DelayWindow, OutlierBurst>;

/// Relative-pose noise of the mapping run; a zero sigma gives unit weight.
struct MappingNoise {
  double sigma_xy = 0.02;
  double sigma_theta = 0.5 * 3.14159265358979323846 / 180.0;
  int frame_stride = 10;  // anchor every N epochs
};

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  double dt = 0.05;
  std::optional<std::int64_t> duration_epochs;
  std::vector<Pose2> waypoints;
  MotionProfile motion;
  TagMap tag_layout;
  SensorModel sensor;
  Mat2 odometry_q = Eigen::Vector2d(1e-4, 4e-5).asDiagonal();
  std::vector<ScenarioEvent> events;
  MappingNoise mapping;
  LocalizerConfig localizer;
};

/// Localizer defaults that match a scenario's sensor and odometry model.
LocalizerConfig default_localizer_config(const Scenario& s);

struct Truth {
  std::vector<Pose2> poses;       // epochs 0..n
  std::vector<Control> controls;  // controls[i]: poses[i] -> poses[i + 1]
};

/// Throws Error(kInvalidArgument) with fewer than two waypoints and
/// Error(kUnreachableWaypoint) when the turn phase cannot face a waypoint.
Truth generate_truth(const Scenario& s);

struct EmittedMeasurement {
  TagMeasurement meas;
  std::int64_t delivery = 0;
  bool outlier = false;
};

struct Stream {
  Truth truth;                                 // kidnaps applied
  std::vector<Control> odometry;               // noisy controls
  std::vector<EmittedMeasurement> measurements;  // sorted by delivery epoch
};

/// Stationary AR(1) vector process with unit marginal variance.
class Ar1Process {
 public:
  Ar1Process(int dim, double rho);
  const Eigen::VectorXd& step(std::mt19937_64& rng);

 private:
  double rho_;
  bool started_ = false;
  Eigen::VectorXd state_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Whether `tag` is detectable from `robot`; fills view distance/angle.
struct Visibility {
  bool visible = false;
  Pose2 tag_in_camera;
  double view_distance = 0.0;
  double view_angle = 0.0;
};
Visibility observe_tag(const SensorModel& sensor, const Pose2& robot, const Pose2& tag);

Stream synthesize_stream(const Scenario& s, const Truth& truth);

struct RunRecord {
  Method method = Method::kScifFull;
  std::vector<EpochEstimate> epochs;
  FusionCounters counters;
  double wall_seconds = 0.0;  // informational; excluded from outputs
};

RunRecord run_method(Method method, const Stream& stream, const LocalizerConfig& cfg,
                     const TagMap& map);


/// Mapping run over the ground-truth trajectory: relative observations of
/// every visible tag with isotropic Gaussian noise and matching information.
MappingSession synthesize_mapping_session(const Scenario& s, const Truth& truth,
                                          const MappingNoise& noise, std::uint64_t seed);

}  // namespace scif::sim
