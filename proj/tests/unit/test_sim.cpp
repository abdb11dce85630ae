#include <cmath>
#include <numbers>
#include <string>

#include "doctest.h"
#include "scif/error.hpp"
#include "scif/io.hpp"
#include "scif/metrics.hpp"
#include "scif/sim.hpp"
#include "support.hpp"

using namespace scif;
using namespace scif::testing;

namespace {

sim::Scenario bundled(const std::string& name) {
  return io::load_scenario(std::string(SCIF_SOURCE_DIR) + "/scenarios/" + name + ".json");
}

sim::Scenario two_point(const Pose2& a, const Pose2& b) {
  sim::Scenario s;
  s.waypoints = {a, b};
  return s;
}

// Drives the closed waypoint loop `laps` times.
void repeat_loop(sim::Scenario& s, int laps) {
  const std::vector<Pose2> loop(s.waypoints.begin() + 1, s.waypoints.end());
  for (int i = 1; i < laps; ++i) s.waypoints.insert(s.waypoints.end(), loop.begin(), loop.end());
}

double lag1_correlation(const std::vector<std::pair<double, double>>& pairs) {
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (const auto& [x, y] : pairs) {
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  const double n = static_cast<double>(pairs.size());
  const double cov = sxy / n - (sx / n) * (sy / n);
  return cov / std::sqrt((sxx / n - (sx / n) * (sx / n)) * (syy / n - (sy / n) * (sy / n)));
}

}  // namespace

TEST_CASE("collinear waypoints give straight controls") {
  const sim::Truth t = sim::generate_truth(two_point({0, 0, 0}, {7.3, 0, 0}));
  REQUIRE_FALSE(t.controls.empty());
  for (const Control& u : t.controls) CHECK(u.delta_theta == 0.0);
  CHECK(pose_error(t.poses.back(), {7.3, 0, 0}) < 1e-9);
}

TEST_CASE("controls replay to the stored poses and a square closes") {
  sim::Scenario s;
  s.waypoints = {{0, 0, 0}, {5, 0, 0}, {5, 5, 0}, {0, 5, 0}, {0, 0, 0}};
  const sim::Truth t = sim::generate_truth(s);
  REQUIRE(t.poses.size() == t.controls.size() + 1);
  Pose2 p = t.poses.front();
  for (std::size_t k = 0; k < t.controls.size(); ++k) {
    p = evolve(p, t.controls[k]);
    CHECK(pose_error(p, t.poses[k + 1]) == 0.0);
  }
  CHECK(pose_error(p, s.waypoints.front()) < 1e-9);
}

TEST_CASE("generate_truth errors") {
  sim::Scenario one;
  one.waypoints = {{0, 0, 0}};
  CHECK_THROWS_AS(sim::generate_truth(one), Error);

  sim::Scenario tight = two_point({0, 0, 0}, {0, 0.02, 0});
  tight.motion.turn_speed = 2.0;
  tight.motion.turn_rate = 0.2;
  try {
    sim::generate_truth(tight);
    FAIL("expected an unreachable waypoint");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnreachableWaypoint);
  }
}

TEST_CASE("duration pads with standstill or truncates") {
  sim::Scenario s = two_point({0, 0, 0}, {1, 0, 0});
  s.duration_epochs = 100;
  const sim::Truth t = sim::generate_truth(s);
  CHECK(t.controls.size() == 100);
  CHECK(t.poses.size() == 101);
  s.duration_epochs = 5;
  CHECK(sim::generate_truth(s).controls.size() == 5);
}

TEST_CASE("zero-noise stream reproduces the truth") {
  const sim::Scenario s = bundled("zero_noise");
  const sim::Truth t = sim::generate_truth(s);
  const sim::Stream st = sim::synthesize_stream(s, t);
  REQUIRE(st.measurements.size() > 100);
  for (std::size_t k = 0; k < st.odometry.size(); ++k) {
    CHECK(st.odometry[k].delta_d == t.controls[k].delta_d);
    CHECK(st.odometry[k].delta_theta == t.controls[k].delta_theta);
  }
  for (const sim::EmittedMeasurement& em : st.measurements) {
    CHECK(em.delivery == em.meas.stamp);
    CHECK_FALSE(em.outlier);
    REQUIRE(em.meas.is_complete());
    const LinearMeasurement z = complete_measurement(em.meas, s.tag_layout, s.sensor.extrinsics);
    CHECK(pose_error(Pose2(Vec3(z.z)), t.poses[static_cast<std::size_t>(em.meas.stamp)]) < 1e-9);
  }
}

TEST_CASE("AR(1) process has the requested lag-1 correlation") {
  std::mt19937_64 rng(5);
  sim::Ar1Process p(1, 0.9);
  std::vector<std::pair<double, double>> pairs;
  double prev = p.step(rng)(0);
  for (int i = 0; i < 20000; ++i) {
    const double x = p.step(rng)(0);
    pairs.emplace_back(prev, x);
    prev = x;
  }
  const double r = lag1_correlation(pairs);
  CHECK(r >= 0.85);
  CHECK(r <= 0.95);
  CHECK_THROWS_AS(sim::Ar1Process(1, 1.0), Error);
}

TEST_CASE("stream measurement noise has the requested lag-1 correlation") {
  sim::Scenario s = bundled("path1");
  s.sensor.ar1_rho = 0.9;
  s.sensor.outlier_rate = 0.0;
  s.sensor.partial_base = 0.0;
  s.sensor.frame_period = 1;
  repeat_loop(s, 3);
  const sim::Truth t = sim::generate_truth(s);
  const sim::Stream st = sim::synthesize_stream(s, t);
  // Normalized x noise per (tag, frame).
  std::map<std::pair<int, std::int64_t>, double> eps;
  for (const sim::EmittedMeasurement& em : st.measurements) {
    const auto& seen = std::get<CompleteDetection>(em.meas.payload).pose_in_camera;
    const Pose2 exact = tag_in_camera_from_robot(t.poses[static_cast<std::size_t>(em.meas.stamp)],
                                                 s.tag_layout.at(em.meas.tag_id),
                                                 s.sensor.extrinsics);
    const double sigma = s.sensor.noise.sigma_xy(em.meas.view_distance, em.meas.view_angle);
    eps[{em.meas.tag_id, em.meas.stamp}] = (seen.x() - exact.x()) / sigma;
  }
  std::vector<std::pair<double, double>> pairs;
  for (const auto& [key, e] : eps) {
    const auto next = eps.find({key.first, key.second + 1});
    if (next != eps.end()) pairs.emplace_back(e, next->second);
  }
  REQUIRE(pairs.size() >= 5000);
  const double r = lag1_correlation(pairs);
  CHECK(r >= 0.85);
  CHECK(r <= 0.95);
}

TEST_CASE("outlier fraction matches the configured rate") {
  sim::Scenario s = bundled("path1");
  s.sensor.outlier_rate = 0.05;
  s.sensor.frame_period = 1;
  repeat_loop(s, 3);
  const sim::Stream st = sim::synthesize_stream(s, sim::generate_truth(s));
  REQUIRE(st.measurements.size() >= 5000);
  std::size_t outliers = 0;
  for (const sim::EmittedMeasurement& em : st.measurements) outliers += em.outlier ? 1 : 0;
  const double frac = static_cast<double>(outliers) / static_cast<double>(st.measurements.size());
  CHECK(std::abs(frac - 0.05) <= 0.01);
}

TEST_CASE("delay windows shift deliveries and the stream stays sorted") {
  const sim::Scenario s = bundled("delay");
  const sim::Stream st = sim::synthesize_stream(s, sim::generate_truth(s));
  bool any_late = false;
  for (std::size_t i = 0; i < st.measurements.size(); ++i) {
    const sim::EmittedMeasurement& em = st.measurements[i];
    const bool window = em.meas.stamp >= 200 && em.meas.stamp < 1000;
    CHECK(em.delivery - em.meas.stamp == (window ? 40 : 0));
    any_late = any_late || window;
    if (i > 0) CHECK(st.measurements[i - 1].delivery <= em.delivery);
  }
  CHECK(any_late);
}

TEST_CASE("kidnap offsets the truth and the motion continues from there") {
  const sim::Scenario s = bundled("kidnap");
  const sim::Truth t = sim::generate_truth(s);
  const sim::Stream st = sim::synthesize_stream(s, t);
  CHECK(pose_error(st.truth.poses[199], t.poses[199]) == 0.0);
  const Pose2 expected = evolve(st.truth.poses[199], t.controls[199]);
  CHECK(st.truth.poses[200].x() == doctest::Approx(expected.x() + 2.0));
  CHECK(st.truth.poses[200].y() == doctest::Approx(expected.y()));
  for (std::size_t k = 201; k < st.truth.poses.size(); ++k) {
    CHECK(pose_error(st.truth.poses[k], evolve(st.truth.poses[k - 1], t.controls[k - 1])) < 1e-12);
  }
}

TEST_CASE("streams are deterministic for a seed and differ across seeds") {
  sim::Scenario s = bundled("ablation");
  const sim::Truth t = sim::generate_truth(s);
  const std::string a = io::measurements_csv(sim::synthesize_stream(s, t).measurements);
  const std::string b = io::measurements_csv(sim::synthesize_stream(s, t).measurements);
  CHECK(a == b);
  s.seed = 2;
  CHECK(io::measurements_csv(sim::synthesize_stream(s, t).measurements) != a);
}

TEST_CASE("visibility is invariant under a rigid motion of the world") {
  Gen g(91);
  sim::SensorModel sensor;
  int visible = 0;
  for (int i = 0; i < 5000; ++i) {
    const Pose2 robot = g.pose(5), tag = g.pose(5), world = g.pose(50);
    const sim::Visibility a = sim::observe_tag(sensor, robot, tag);
    const sim::Visibility b = sim::observe_tag(sensor, compose(world, robot), compose(world, tag));
    CHECK(a.visible == b.visible);
    CHECK(a.view_distance == doctest::Approx(b.view_distance));
    CHECK(a.view_angle == doctest::Approx(b.view_angle));
    visible += a.visible ? 1 : 0;
  }
  CHECK(visible > 20);
}

TEST_CASE("observe_tag geometry") {
  sim::SensorModel sensor;
  sensor.extrinsics = Pose2();
  // Tag 2 m straight ahead, facing the camera.
  const sim::Visibility v = sim::observe_tag(sensor, Pose2(), Pose2(2, 0, std::numbers::pi));
  CHECK(v.visible);
  CHECK(v.view_distance == doctest::Approx(2.0));
  CHECK(v.view_angle == doctest::Approx(sensor.min_view_angle));
  CHECK_FALSE(sim::observe_tag(sensor, Pose2(), Pose2(2, 0, 0)).visible);       // back side
  CHECK_FALSE(sim::observe_tag(sensor, Pose2(), Pose2(0, 2, -1.57)).visible);   // outside fov
  CHECK_FALSE(sim::observe_tag(sensor, Pose2(), Pose2(7, 0, 3.14)).visible);    // too far
}

TEST_CASE("zero-noise stream: every method is exact") {
  const sim::Scenario s = bundled("zero_noise");
  const sim::Stream st = sim::synthesize_stream(s, sim::generate_truth(s));
  for (Method m : kAllMethods) {
    const sim::RunRecord rec = sim::run_method(m, st, s.localizer, s.tag_layout);
    const ErrorReport r = summarize(position_errors(rec.epochs, st.truth.poses));
    CAPTURE(method_name(m));
    CHECK(r.rmse < 1e-9);
  }
}

TEST_CASE("EKF-Full equals SCIF-Full without correlated noise") {
  sim::Scenario s = bundled("path1");
  s.sensor.ar1_rho = 0.0;
  s.localizer.dependent_share = 0.0;
  const sim::Stream st = sim::synthesize_stream(s, sim::generate_truth(s));
  const sim::RunRecord ekf = sim::run_method(Method::kEkfFull, st, s.localizer, s.tag_layout);
  const sim::RunRecord scif = sim::run_method(Method::kScifFull, st, s.localizer, s.tag_layout);
  REQUIRE(ekf.epochs.size() == scif.epochs.size());
  for (std::size_t k = 0; k < ekf.epochs.size(); ++k) {
    REQUIRE(ekf.epochs[k].state.has_value() == scif.epochs[k].state.has_value());
    if (!ekf.epochs[k].state) continue;
    CHECK(max_abs_diff(ekf.epochs[k].state->mean.vector(), scif.epochs[k].state->mean.vector()) < 1e-9);
    CHECK(max_abs_diff(ekf.epochs[k].state->total(), scif.epochs[k].state->total()) < 1e-9);
  }
}

TEST_CASE("SCIF-nonBP equals SCIF-Full without delay") {
  const sim::Scenario s = bundled("path1");
  const sim::Stream st = sim::synthesize_stream(s, sim::generate_truth(s));
  const sim::RunRecord bp = sim::run_method(Method::kScifFull, st, s.localizer, s.tag_layout);
  const sim::RunRecord nbp = sim::run_method(Method::kScifNonBP, st, s.localizer, s.tag_layout);
  for (std::size_t k = 0; k < bp.epochs.size(); ++k) {
    REQUIRE(bp.epochs[k].state.has_value() == nbp.epochs[k].state.has_value());
    if (!bp.epochs[k].state) continue;
    CHECK(max_abs_diff(bp.epochs[k].state->mean.vector(), nbp.epochs[k].state->mean.vector()) <= 1e-12);
    CHECK(max_abs_diff(bp.epochs[k].state->total(), nbp.epochs[k].state->total()) <= 1e-12);
  }
}

TEST_CASE("default localizer config follows the scenario") {
  sim::Scenario s;
  s.sensor.ar1_rho = 0.5;
  s.sensor.max_range = 4.0;
  const LocalizerConfig c = sim::default_localizer_config(s);
  CHECK(c.dependent_share == doctest::Approx(0.25));
  CHECK(c.process.q == s.odometry_q);
  CHECK(c.range_sigma == doctest::Approx(s.sensor.noise.sigma_xy(2.0, 0.5)));
}

TEST_CASE("mapping session observes visible tags from true anchors") {
  const sim::Scenario s = bundled("path1");
  const sim::Truth t = sim::generate_truth(s);
  const MappingSession ms = sim::synthesize_mapping_session(s, t, sim::MappingNoise{}, 3);
  REQUIRE_FALSE(ms.observations.empty());
  for (const TagObservation& o : ms.observations) {
    const Pose2& anchor = ms.robot_poses.at(o.epoch);
    CHECK(pose_error(anchor, t.poses[static_cast<std::size_t>(o.epoch)]) == 0.0);
    CHECK((compose(anchor, o.relative_pose).translation() -
           s.tag_layout.at(o.tag_id).translation()).norm() < 0.2);
  }
  const MappingSession again = sim::synthesize_mapping_session(s, t, sim::MappingNoise{}, 3);
  CHECK(io::session_to_json(ms).dump() == io::session_to_json(again).dump());
}
