#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "scif/error.hpp"
#include "scif/geometry.hpp"
#include "support.hpp"

using namespace scif;
using scif::testing::Gen;
using scif::testing::pose_error;

constexpr double kPi = std::numbers::pi;

TEST_CASE("wrap_angle examples") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(3.0 * kPi) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(wrap_angle(-kPi) == kPi);
  CHECK(wrap_angle(kPi) == kPi);
}

TEST_CASE("wrap_angle rejects non-finite input") {
  CHECK_THROWS_AS(wrap_angle(std::numeric_limits<double>::quiet_NaN()), Error);
  CHECK_THROWS_AS(wrap_angle(std::numeric_limits<double>::infinity()), Error);
}

TEST_CASE("wrap_angle: range, 2pi multiple, idempotent") {
  Gen g(11);
  for (int i = 0; i < 2000; ++i) {
    const double t = g.uniform(-100.0, 100.0);
    const double w = wrap_angle(t);
    CHECK(w > -kPi);
    CHECK(w <= kPi);
    const double turns = (t - w) / (2.0 * kPi);
    CHECK(std::abs(turns - std::round(turns)) < 1e-9);
    CHECK(wrap_angle(w) == w);
  }
}

TEST_CASE("Pose2 constructor keeps heading in range") {
  const Pose2 p(1.0, 2.0, 3.0 * kPi);
  CHECK(p.theta() == doctest::Approx(kPi));
  CHECK(Pose2(0, 0, -kPi).theta() == kPi);
}

TEST_CASE("compose examples") {
  const Pose2 p(1.5, -2.0, 0.7);
  CHECK(pose_error(compose(Pose2::identity(), p), p) == 0.0);
  CHECK(pose_error(compose({1, 0, 0}, {1, 0, 0}), {2, 0, 0}) < 1e-15);
  CHECK(pose_error(compose({0, 0, kPi / 2}, {1, 0, 0}), {0, 1, kPi / 2}) < 1e-15);
}

TEST_CASE("inverse examples") {
  CHECK(pose_error(inverse(Pose2::identity()), Pose2::identity()) == 0.0);
  CHECK(pose_error(inverse({1, 0, 0}), {-1, 0, 0}) < 1e-15);
  CHECK(pose_error(inverse({0, 0, kPi / 2}), {0, 0, -kPi / 2}) < 1e-15);
}

TEST_CASE("compose is associative and inverse is two-sided") {
  Gen g(12);
  for (int i = 0; i < 1000; ++i) {
    const Pose2 a = g.pose(), b = g.pose(), c = g.pose();
    CHECK(pose_error(compose(compose(a, b), c), compose(a, compose(b, c))) < 1e-9);
    CHECK(pose_error(compose(a, inverse(a)), Pose2::identity()) < 1e-12);
    CHECK(pose_error(compose(inverse(a), a), Pose2::identity()) < 1e-12);
  }
}

TEST_CASE("pose_difference wraps the heading") {
  const Vec3 d = pose_difference({0, 0, kPi - 0.1}, {0, 0, -kPi + 0.1});
  CHECK(d.z() == doctest::Approx(-0.2));
}

TEST_CASE("robot_pose_from_tag_detection examples") {
  const Pose2 id;
  CHECK(pose_error(robot_pose_from_tag_detection(id, id, id), id) == 0.0);
  CHECK(pose_error(robot_pose_from_tag_detection({5, 0, 0}, {2, 0, 0}, id), {3, 0, 0}) < 1e-15);
}

TEST_CASE("robot_pose_from_tag_detection round-trips a forward-simulated detection") {
  Gen g(13);
  for (int i = 0; i < 1000; ++i) {
    const Pose2 robot = g.pose(), tag = g.pose(), ext = g.pose(0.5);
    // Forward model written out directly: tag in camera = (robot * ext)^-1 * tag.
    const Pose2 cam = compose(robot, ext);
    const double c = std::cos(cam.theta()), s = std::sin(cam.theta());
    const double dx = tag.x() - cam.x(), dy = tag.y() - cam.y();
    const Pose2 seen(c * dx + s * dy, -s * dx + c * dy, tag.theta() - cam.theta());
    CHECK(pose_error(tag_in_camera_from_robot(robot, tag, ext), seen) < 1e-9);
    CHECK(pose_error(robot_pose_from_tag_detection(tag, seen, ext), robot) < 1e-9);
  }
}

TEST_CASE("detection_jacobian matches central differences") {
  Gen g(14);
  const double h = 1e-6;
  for (int i = 0; i < 500; ++i) {
    const Pose2 tag = g.pose(), seen = g.pose(3.0), ext = g.pose(0.5);
    const Mat3 j = detection_jacobian(tag, seen, ext);
    for (int k = 0; k < 3; ++k) {
      Vec3 lo = seen.vector(), hi = seen.vector();
      lo(k) -= h;
      hi(k) += h;
      const Vec3 fd = pose_difference(robot_pose_from_tag_detection(tag, Pose2(hi), ext),
                                      robot_pose_from_tag_detection(tag, Pose2(lo), ext)) /
                      (2.0 * h);
      CHECK((j.col(k) - fd).cwiseAbs().maxCoeff() < 1e-5);
    }
  }
}

TEST_CASE("covariance helpers") {
  Gen g(15);
  const Eigen::MatrixXd a = g.matrix(3, 3);
  CHECK(is_symmetric(symmetrize(a)));
  Eigen::MatrixXd indefinite = Eigen::Vector3d(1.0, -1e-3, 2.0).asDiagonal();
  CHECK_FALSE(is_psd(indefinite));
  const Eigen::MatrixXd floored = floor_psd(indefinite);
  CHECK(is_psd(floored, 0.0));
  CHECK(floored(1, 1) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(floored(2, 2) == doctest::Approx(2.0));
}
