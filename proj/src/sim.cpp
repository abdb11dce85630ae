#include "scif/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/Cholesky>

#include "scif/error.hpp"

namespace scif::sim {

namespace {

constexpr double kAlignTol = 1e-12;
constexpr std::uint64_t kOdometryStream = 1;
constexpr std::uint64_t kMeasurementStream = 2;
constexpr std::uint64_t kMappingStream = 3;

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

Eigen::Vector2d sample_gaussian2(const Mat2& cov, std::mt19937_64& rng,
                                 std::normal_distribution<double>& normal) {
  const Eigen::Vector2d w(normal(rng), normal(rng));
  if (cov.isZero(0.0)) return Eigen::Vector2d::Zero();
  const Mat2 l = Eigen::LLT<Mat2>(cov).matrixL();
  return l * w;
}

}  // namespace

double SensorModel::partial_probability(double view_distance, double view_angle) const {
  return std::clamp(partial_base + partial_per_meter * view_distance +
                        partial_per_radian * view_angle,
                    0.0, 1.0);
}

LocalizerConfig default_localizer_config(const Scenario& s) {
  LocalizerConfig cfg;
  cfg.extrinsics = s.sensor.extrinsics;
  cfg.process.q = s.odometry_q;
  cfg.process.p_pre_ind = Vec3(1e-6, 1e-6, 1e-7).asDiagonal();
  cfg.detection_noise = s.sensor.noise;
  cfg.dependent_share = s.sensor.ar1_rho * s.sensor.ar1_rho;
  cfg.range_sigma = s.sensor.noise.sigma_xy(0.5 * s.sensor.max_range, 0.5);
  return cfg;
}

Truth generate_truth(const Scenario& s) {
  if (s.waypoints.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "generate_truth: need at least two waypoints");
  }
  if (!(s.dt > 0.0) || !(s.motion.speed > 0.0) || !(s.motion.turn_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "generate_truth: dt, speed and turn_rate must be positive");
  }
  const double step_len = s.motion.speed * s.dt;
  const double max_turn = s.motion.turn_rate * s.dt;
  const double creep = std::max(0.0, s.motion.turn_speed) * s.dt;
  const auto max_turn_steps =
      static_cast<std::int64_t>(std::ceil(4.0 * std::numbers::pi / max_turn)) + 10;

  Truth t;
  t.poses.push_back(s.waypoints.front());
  auto push = [&](double dd, double dth) {
    Control u;
    u.delta_d = dd;
    u.delta_theta = dth;
    u.beta = 0.0;
    u.dt = s.dt;
    t.controls.push_back(u);
    t.poses.push_back(evolve(t.poses.back(), u));
  };
  auto turn_to = [&](double heading) {
    for (;;) {
      const double err = wrap_angle(heading - t.poses.back().theta());
      if (std::abs(err) <= kAlignTol) return;
      push(0.0, std::clamp(err, -max_turn, max_turn));
    }
  };

  for (std::size_t i = 1; i < s.waypoints.size(); ++i) {
    const Eigen::Vector2d goal = s.waypoints[i].translation();
    std::int64_t steps = 0;
    for (;;) {
      const Eigen::Vector2d d = goal - t.poses.back().translation();
      if (d.norm() <= kAlignTol) break;
      const double err = wrap_angle(std::atan2(d.y(), d.x()) - t.poses.back().theta());
      if (std::abs(err) <= kAlignTol) break;
      if (++steps > max_turn_steps) {
        throw Error(ErrorCode::kUnreachableWaypoint,
                    "generate_truth: waypoint " + std::to_string(i) +
                        " lies inside the turning circle");
      }
      push(std::abs(err) > max_turn ? creep : 0.0, std::clamp(err, -max_turn, max_turn));
    }
    const double dist = (goal - t.poses.back().translation()).norm();
    if (dist > kAlignTol) {
      const auto n = static_cast<std::int64_t>(std::ceil(dist / step_len));
      for (std::int64_t k = 0; k < n; ++k) push(dist / static_cast<double>(n), 0.0);
    }
  }
  turn_to(s.waypoints.back().theta());

  if (s.duration_epochs) {
    const auto n = static_cast<std::size_t>(std::max<std::int64_t>(*s.duration_epochs, 1));
    if (t.controls.size() > n) {
      t.controls.resize(n);
      t.poses.resize(n + 1);
    }
    while (t.controls.size() < n) push(0.0, 0.0);
  }
  return t;
}

Ar1Process::Ar1Process(int dim, double rho) : rho_(rho), state_(Eigen::VectorXd::Zero(dim)) {
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "AR(1) coefficient must lie in [0, 1)");
  }
}

const Eigen::VectorXd& Ar1Process::step(std::mt19937_64& rng) {
  const double innovation_scale = std::sqrt(1.0 - rho_ * rho_);
  for (Eigen::Index i = 0; i < state_.size(); ++i) {
    const double w = normal_(rng);
    state_(i) = started_ ? rho_ * state_(i) + innovation_scale * w : w;
  }
  started_ = true;
  return state_;
}

Visibility observe_tag(const SensorModel& sensor, const Pose2& robot, const Pose2& tag) {
  Visibility v;
  v.tag_in_camera = tag_in_camera_from_robot(robot, tag, sensor.extrinsics);
  const double l = v.tag_in_camera.translation().norm();
  const double bearing = std::atan2(v.tag_in_camera.y(), v.tag_in_camera.x());
  // Tag normal must point back at the camera: head-on means tag heading = pi.
  const double alpha = std::abs(wrap_angle(v.tag_in_camera.theta() - std::numbers::pi));
  v.view_distance = l;
  v.view_angle = std::max(alpha, sensor.min_view_angle);
  v.visible = l >= sensor.min_range && l <= sensor.max_range &&
              std::abs(bearing) <= sensor.fov_half_angle && alpha < 0.5 * std::numbers::pi;
  return v;
}

namespace {

std::vector<Pose2> apply_kidnaps(const Truth& truth, const std::vector<ScenarioEvent>& events) {
  std::vector<Pose2> poses = truth.poses;
  std::map<std::int64_t, Pose2> kidnaps;
  for (const ScenarioEvent& e : events) {
    if (const auto* k = std::get_if<KidnapEvent>(&e)) kidnaps[k->epoch] = k->offset;
  }
  if (kidnaps.empty()) return poses;
  for (std::size_t k = 1; k < poses.size(); ++k) {
    Pose2 p = evolve(poses[k - 1], truth.controls[k - 1]);
    if (const auto it = kidnaps.find(static_cast<std::int64_t>(k)); it != kidnaps.end()) {
      const Pose2& o = it->second;
      p = Pose2(p.x() + o.x(), p.y() + o.y(), p.theta() + o.theta());
    }
    poses[k] = p;
  }
  return poses;
}

std::int64_t delay_at(const std::vector<ScenarioEvent>& events, std::int64_t epoch) {
  std::int64_t delay = 0;
  for (const ScenarioEvent& e : events) {
    if (const auto* d = std::get_if<DelayWindow>(&e)) {
      if (epoch >= d->start && epoch < d->end) delay = d->delay;
    }
  }
  return delay;
}

double outlier_rate_at(const SensorModel& sensor, const std::vector<ScenarioEvent>& events,
                       std::int64_t epoch) {
  double rate = sensor.outlier_rate;
  for (const ScenarioEvent& e : events) {
    if (const auto* b = std::get_if<OutlierBurst>(&e)) {
      if (epoch >= b->start && epoch < b->end) rate = b->rate;
    }
  }
  return rate;
}

}  // namespace

Stream synthesize_stream(const Scenario& s, const Truth& truth) {
  const SensorModel& sensor = s.sensor;
  if (sensor.frame_period < 1) {
    throw Error(ErrorCode::kInvalidArgument, "sensor frame_period must be >= 1");
  }
  Stream out;
  out.truth.controls = truth.controls;
  out.truth.poses = apply_kidnaps(truth, s.events);

  std::mt19937_64 odo_rng = make_rng(s.seed, kOdometryStream);
  std::normal_distribution<double> normal(0.0, 1.0);
  out.odometry.reserve(truth.controls.size());
  for (const Control& u : truth.controls) {
    const Eigen::Vector2d n = sample_gaussian2(s.odometry_q, odo_rng, normal);
    Control noisy = u;
    noisy.delta_d += n.x();
    noisy.delta_theta += n.y();
    out.odometry.push_back(noisy);
  }

  std::mt19937_64 rng = make_rng(s.seed, kMeasurementStream);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::map<int, Ar1Process> noise;
  for (const auto& [id, pose] : s.tag_layout.entries) noise.emplace(id, Ar1Process(4, sensor.ar1_rho));

  for (std::size_t k = 0; k < out.truth.poses.size(); ++k) {
    const auto epoch = static_cast<std::int64_t>(k);
    if (epoch % sensor.frame_period != 0) continue;
    const Pose2& robot = out.truth.poses[k];
    const double rate = outlier_rate_at(sensor, s.events, epoch);
    const std::int64_t delay = delay_at(s.events, epoch);
    for (auto& [id, process] : noise) {
      // Draw a fixed number of variates per tag and frame so the stream does
      // not depend on which tags happen to be visible.
      const Eigen::VectorXd eps = process.step(rng);
      const double u_partial = uniform(rng);
      const double u_outlier = uniform(rng);
      const double u_dir = uniform(rng);
      const double u_ang = uniform(rng);

      const Pose2& tag = s.tag_layout.entries.at(id);
      const Visibility vis = observe_tag(sensor, robot, tag);
      if (!vis.visible) continue;

      EmittedMeasurement em;
      em.meas.tag_id = id;
      em.meas.stamp = epoch;
      em.meas.view_distance = vis.view_distance;
      em.meas.view_angle = std::min(vis.view_angle, 0.5 * std::numbers::pi);
      em.delivery = epoch + delay;
      em.outlier = u_outlier < rate;

      const double sxy = sensor.noise.sigma_xy(vis.view_distance, vis.view_angle);
      const double sth = sensor.noise.sigma_theta(vis.view_distance, vis.view_angle);
      if (u_partial < sensor.partial_probability(vis.view_distance, vis.view_angle)) {
        double range = (robot.translation() - tag.translation()).norm() + sxy * eps(3);
        if (em.outlier) range += sensor.outlier_magnitude * (u_dir < 0.5 ? -1.0 : 1.0);
        em.meas.payload = DistanceOnlyDetection{std::max(range, 1e-3)};
      } else {
        double x = vis.tag_in_camera.x() + sxy * eps(0);
        double y = vis.tag_in_camera.y() + sxy * eps(1);
        double th = vis.tag_in_camera.theta() + sth * eps(2);
        if (em.outlier) {
          const double a = 2.0 * std::numbers::pi * u_dir;
          x += sensor.outlier_magnitude * std::cos(a);
          y += sensor.outlier_magnitude * std::sin(a);
          th += sensor.outlier_angle * (2.0 * u_ang - 1.0);
        }
        em.meas.payload = CompleteDetection{Pose2(x, y, th)};
      }
      out.measurements.push_back(em);
    }
  }
  std::stable_sort(out.measurements.begin(), out.measurements.end(),
                   [](const EmittedMeasurement& a, const EmittedMeasurement& b) {
                     return a.delivery < b.delivery;
                   });
  return out;
}

RunRecord run_method(Method method, const Stream& stream, const LocalizerConfig& cfg,
                     const TagMap& map) {
  const auto start = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.method = method;
  Localizer loc(method, cfg, map);

  const std::size_t n = stream.truth.poses.size();
  rec.epochs.reserve(n);
  std::size_t next = 0;
  std::vector<TagMeasurement> arrivals;
  for (std::size_t k = 0; k < n; ++k) {
    const auto epoch = static_cast<std::int64_t>(k);
    arrivals.clear();
    while (next < stream.measurements.size() && stream.measurements[next].delivery <= epoch) {
      if (stream.measurements[next].delivery == epoch) {
        arrivals.push_back(stream.measurements[next].meas);
      }
      ++next;
    }
    std::optional<Control> odo;
    if (k > 0) odo = stream.odometry[k - 1];
    rec.epochs.push_back(loc.step(epoch, odo, arrivals));
  }
  rec.counters = loc.counters();
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

MappingSession synthesize_mapping_session(const Scenario& s, const Truth& truth,
                                          const MappingNoise& noise, std::uint64_t seed) {
  MappingSession session;
  session.session_id = s.name + "-mapping-" + std::to_string(seed);
  std::mt19937_64 rng = make_rng(seed, kMappingStream);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto weight = [](double sigma) { return sigma > 0.0 ? 1.0 / (sigma * sigma) : 1.0; };
  const Mat3 info =
      Vec3(weight(noise.sigma_xy), weight(noise.sigma_xy), weight(noise.sigma_theta)).asDiagonal();
  for (const auto& [id, pose] : s.tag_layout.entries) session.expected_tags.push_back(id);

  const int stride = std::max(1, noise.frame_stride);
  for (std::size_t k = 0; k < truth.poses.size(); k += static_cast<std::size_t>(stride)) {
    const Pose2& robot = truth.poses[k];
    bool any = false;
    for (const auto& [id, tag] : s.tag_layout.entries) {
      const double n0 = normal(rng);
      const double n1 = normal(rng);
      const double n2 = normal(rng);
      if (!observe_tag(s.sensor, robot, tag).visible) continue;
      const Pose2 rel = compose(inverse(robot), tag);
      session.observations.push_back(
          {static_cast<std::int64_t>(k), id,
           Pose2(rel.x() + noise.sigma_xy * n0, rel.y() + noise.sigma_xy * n1,
                 rel.theta() + noise.sigma_theta * n2),
           info});
      any = true;
    }
    if (any) session.robot_poses[static_cast<std::int64_t>(k)] = robot;
  }
  return session;
}

}  // namespace scif::sim
