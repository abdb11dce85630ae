#include <cmath>
#include <numbers>

#include "doctest.h"
#include "scif/error.hpp"
#include "scif/motion_model.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace scif;
using scif::testing::Gen;
using scif::testing::pose_error;
using scif::testing::fd_jacobian_control;
using scif::testing::fd_jacobian_state;

constexpr double kPi = std::numbers::pi;

namespace {

Control make(double dd, double dth, double beta = 0.0) {
  Control u;
  u.delta_d = dd;
  u.delta_theta = dth;
  u.beta = beta;
  return u;
}

}  // namespace

TEST_CASE("evolve examples") {
  const Pose2 p(1.0, -2.0, 0.3);
  CHECK(pose_error(evolve(p, make(0, 0, 0.7)), p) == 0.0);
  CHECK(pose_error(evolve({}, make(1, 0)), {1, 0, 0}) < 1e-15);
  CHECK(pose_error(evolve({}, make(1, kPi / 2)),
                   {std::cos(kPi / 4), std::sin(kPi / 4), kPi / 2}) < 1e-15);
}

TEST_CASE("evolve wraps the heading") {
  const Pose2 p = evolve({0, 0, kPi - 0.05}, make(0, 0.1));
  CHECK(p.theta() == doctest::Approx(-kPi + 0.05));
}

TEST_CASE("jacobian_state examples") {
  const Pose2 p(3.0, 1.0, 0.4);
  CHECK(jacobian_state(p, make(0, 0.2, 0.1)).isApprox(Mat3::Identity()));
  const Mat3 g = jacobian_state({}, make(1, 0));
  CHECK(g(0, 2) == doctest::Approx(0.0));
  CHECK(g(1, 2) == doctest::Approx(1.0));
}

TEST_CASE("jacobian_control examples") {
  const Mat32 g = jacobian_control({}, make(0, 0));
  CHECK(g(0, 0) == doctest::Approx(1.0));
  CHECK(g(1, 0) == doctest::Approx(0.0));
  Gen gen(21);
  for (int i = 0; i < 50; ++i) {
    CHECK(jacobian_control(gen.pose(), make(0, gen.uniform(-1, 1)))(2, 1) == 1.0);
  }
}

TEST_CASE("Jacobians match central differences on random samples") {
  Gen g(22);
  for (int i = 0; i < 1000; ++i) {
    const Pose2 p = g.pose();
    const Control u = g.control();
    CHECK((jacobian_state(p, u) - fd_jacobian_state(p, u)).cwiseAbs().maxCoeff() < 1e-5);
    CHECK((jacobian_control(p, u) - fd_jacobian_control(p, u)).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("straight segments reverse exactly under the negated control") {
  Gen g(23);
  for (int i = 0; i < 1000; ++i) {
    const Pose2 p = g.pose();
    Control u = g.control();
    u.delta_theta = 0.0;
    Control back = u;
    back.delta_d = -u.delta_d;
    CHECK(pose_error(evolve(evolve(p, u), back), p) < 1e-12);
  }
}

TEST_CASE("validate rejects bad controls") {
  Control u;
  CHECK_NOTHROW(validate(u));
  u.dt = 0.0;
  CHECK_THROWS_AS(validate(u), Error);
  u.dt = 0.05;
  u.beta = kPi / 2;
  CHECK_THROWS_AS(validate(u), Error);
}
