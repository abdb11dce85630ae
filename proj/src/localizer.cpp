#include "scif/localizer.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "scif/error.hpp"

namespace scif {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kTagSlam: return "TagSLAM";
    case Method::kEkfFull: return "EKF-Full";
    case Method::kScifNonMA: return "SCIF-nonMA";
    case Method::kScifNonP: return "SCIF-nonP";
    case Method::kScifNonBP: return "SCIF-nonBP";
    case Method::kScifFull: return "SCIF-Full";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : kAllMethods) {
    if (method_name(m) == name) return m;
  }
  return std::nullopt;
}

std::string valid_method_names() {
  std::string out;
  for (Method m : kAllMethods) {
    if (!out.empty()) out += ", ";
    out += method_name(m);
  }
  return out;
}

MethodFlags flags_for(Method m) {
  MethodFlags f;
  switch (m) {
    case Method::kTagSlam:
      f.fusion = false;
      break;
    case Method::kEkfFull:
      f.split = false;
      break;
    case Method::kScifNonMA:
      f.adaptive = false;
      break;
    case Method::kScifNonP:
      f.partial = false;
      break;
    case Method::kScifNonBP:
      f.back_projection = false;
      break;
    case Method::kScifFull:
      break;
  }
  return f;
}

Localizer::Localizer(Method method, LocalizerConfig config, TagMap map)
    : method_(method),
      flags_(flags_for(method)),
      cfg_(std::move(config)),
      map_(std::move(map)),
      history_(cfg_.history_capacity),
      monitor_(cfg_.init.kidnap_discard_limit) {}

EpochEstimate Localizer::step(std::int64_t epoch, const std::optional<Control>& odometry,
                              std::span<const TagMeasurement> arrivals) {
  if (!flags_.fusion) return step_detection_only(epoch, arrivals);

  EpochEstimate out;
  out.epoch = epoch;

  if (odometry) {
    if (!controls_.empty() && controls_.back().first + 1 != epoch) controls_.clear();
    controls_.emplace_back(epoch, *odometry);
    while (controls_.size() > cfg_.history_capacity) controls_.pop_front();
  }
  if (initialized_) {
    if (!odometry) {
      throw Error(ErrorCode::kInvalidArgument, "localizer: missing odometry after initialization");
    }
    history_.record_epoch(predict(history_.head().state, *odometry, cfg_.process), *odometry);
  }

  const PropagateFn propagate = [this](const SplitState& s, const Control& u) {
    return predict(s, u, cfg_.process);
  };
  const UpdateFn update_fn = [this](const SplitState& s, std::span<const TagMeasurement> g,
                                    FusionPass pass) { return update(s, g, pass); };

  std::vector<MeasurementGroup> groups;
  for (const TagMeasurement& meas : arrivals) {
    validate(meas);
    if (!map_.contains(meas.tag_id)) {
      ++counters_.unknown_tag;
      continue;
    }
    if (!initialized_ || monitor_.state() == TrackingState::kReinitializing) {
      if (meas.is_complete()) {
        initialize(epoch, meas);
        out.reinitialized = true;
        groups.clear();
      }
      continue;
    }
    TagMeasurement fused = meas;
    if (!flags_.back_projection) fused.stamp = epoch;
    auto it = std::find_if(groups.begin(), groups.end(), [&](const MeasurementGroup& g) {
      return g.front().stamp == fused.stamp;
    });
    if (it == groups.end()) {
      groups.push_back({fused});
    } else {
      it->push_back(fused);
    }
  }
  for (const MeasurementGroup& g : groups) {
    // A kidnap detected while fusing an earlier group stops further fusion.
    if (monitor_.state() == TrackingState::kReinitializing) break;
    try {
      history_.apply_delayed(g, propagate, update_fn);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kStaleMeasurement) throw;
      counters_.stale += static_cast<std::int64_t>(g.size());
    }
  }

  if (initialized_) {
    out.state = history_.head().state;
    out.reliable = monitor_.state() == TrackingState::kTracking;
  }
  return out;
}

EpochEstimate Localizer::step_detection_only(std::int64_t epoch,
                                             std::span<const TagMeasurement> arrivals) {
  EpochEstimate out;
  out.epoch = epoch;
  Eigen::Vector2d xy = Eigen::Vector2d::Zero();
  double sin_sum = 0.0;
  double cos_sum = 0.0;
  Mat3 cov = Mat3::Zero();
  int n = 0;
  for (const TagMeasurement& meas : arrivals) {
    validate(meas);
    if (!map_.contains(meas.tag_id)) {
      ++counters_.unknown_tag;
      continue;
    }
    if (!meas.is_complete()) {
      ++counters_.ignored;
      continue;
    }
    const LinearMeasurement z = complete_measurement(meas, map_, cfg_.extrinsics);
    xy += z.z.head<2>();
    sin_sum += std::sin(z.z(2));
    cos_sum += std::cos(z.z(2));
    cov += nominal_pose_covariance(meas, map_, cfg_.extrinsics, cfg_.detection_noise);
    ++counters_.accepted;
    ++n;
  }
  if (n > 0) {
    SplitState s;
    s.mean = Pose2(xy.x() / n, xy.y() / n, std::atan2(sin_sum, cos_sum));
    s.p_ind = cov / static_cast<double>(n * n);
    s.epoch = epoch;
    out.state = s;
  }
  return out;
}

void Localizer::initialize(std::int64_t epoch, const TagMeasurement& meas) {
  SplitState s = init_from_measurement(meas, map_, cfg_.extrinsics, cfg_.init);
  // A late detection describes the robot at its stamp: start there and
  // replay the buffered odometry up to now.
  std::int64_t start = epoch;
  if (flags_.back_projection && meas.stamp < epoch && !controls_.empty() &&
      controls_.back().first == epoch) {
    start = std::max(meas.stamp, controls_.front().first - 1);
  }
  s.epoch = start;
  history_.clear();
  history_.record_epoch(s, Control{});
  for (std::int64_t e = start + 1; e <= epoch; ++e) {
    const Control& u =
        controls_[static_cast<std::size_t>(e - controls_.front().first)].second;
    history_.record_epoch(predict(history_.head().state, u, cfg_.process), u);
  }
  if (initialized_) ++counters_.reinitializations;
  initialized_ = true;
  monitor_.mark_initialized();
}

SplitNoise Localizer::split_of(const Eigen::MatrixXd& r) const {
  if (!flags_.split) return SplitNoise::independent(r);
  return SplitNoise::with_share(r, cfg_.dependent_share);
}

SplitState Localizer::update(const SplitState& state, std::span<const TagMeasurement> group,
                             FusionPass pass) {
  SplitState s = state;
  if (!flags_.split) {
    // EKF baseline: the whole covariance is treated as independent.
    s.p_ind = s.total();
    s.p_dep.setZero();
  }
  std::vector<LinearMeasurement> parts;
  std::vector<SplitNoise> noises;
  for (const TagMeasurement& meas : group) {
    std::optional<Prepared> p =
        meas.is_complete() ? prepare_complete(s, meas, pass) : prepare_distance(s, meas, pass);
    if (!p) continue;
    parts.push_back(std::move(p->z));
    noises.push_back(std::move(p->noise));
  }
  if (parts.empty()) return s;
  try {
    return fuse(s, stack_measurements(parts), stack_noise(noises));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kSingularInnovation) throw;
    if (pass == FusionPass::kArrival) ++counters_.singular;
    return s;
  }
}

std::optional<Localizer::Prepared> Localizer::prepare_complete(const SplitState& state,
                                                               const TagMeasurement& meas,
                                                               FusionPass pass) {
  const bool arrival = pass == FusionPass::kArrival;
  LinearMeasurement z = complete_measurement(meas, map_, cfg_.extrinsics);
  const Vec3 zv = z.z;
  const ScreeningDecision decision =
      screen(state.mean, zv, cfg_.screening.hard_threshold, cfg_.screening.soft_threshold,
             cfg_.screening.angle_weight);
  if (arrival) {
    monitor_.observe_decision(decision);
    switch (decision) {
      case ScreeningDecision::kAccept: ++counters_.accepted; break;
      case ScreeningDecision::kSoftAccept: ++counters_.soft_accepted; break;
      case ScreeningDecision::kDiscard: ++counters_.discarded; break;
    }
  }
  if (decision == ScreeningDecision::kDiscard) return std::nullopt;

  SplitNoise noise;
  if (decision == ScreeningDecision::kSoftAccept && flags_.adaptive) {
    AdaptiveNoiseConfig acfg = cfg_.adaptive;
    if (!flags_.split) acfg.dependent_fraction = 0.0;
    noise = adaptive_noise(state.mean, zv, meas.view_distance, meas.view_angle, acfg,
                           cfg_.screening.angle_weight);
  } else {
    noise = split_of(
        nominal_pose_covariance(meas, map_, cfg_.extrinsics, cfg_.detection_noise));
  }
  return Prepared{std::move(z), std::move(noise)};
}

std::optional<Localizer::Prepared> Localizer::prepare_distance(const SplitState& state,
                                                               const TagMeasurement& meas,
                                                               FusionPass pass) {
  const bool arrival = pass == FusionPass::kArrival;
  if (!flags_.partial) {
    if (arrival) ++counters_.ignored;
    return std::nullopt;
  }
  const double range = std::get<DistanceOnlyDetection>(meas.payload).range;
  RangeLinearization lin;
  try {
    lin = linearize_distance(state.mean, map_.at(meas.tag_id).translation(), range,
                             cfg_.range_d_min);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kRangeSingularity) throw;
    if (arrival) ++counters_.discarded;
    return std::nullopt;
  }
  // No adaptive model exists for a bare range, so anything past the soft
  // threshold is rejected outright.
  if (std::abs(range - lin.predicted_range) > cfg_.screening.soft_threshold) {
    if (arrival) ++counters_.discarded;
    return std::nullopt;
  }
  if (arrival) ++counters_.partial_fused;
  const Eigen::MatrixXd r = Eigen::MatrixXd::Constant(1, 1, cfg_.range_sigma * cfg_.range_sigma);
  return Prepared{lin.as_measurement(), SplitNoise::independent(r)};
}

}  // namespace scif
