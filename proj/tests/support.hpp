#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Core>

#include "scif/geometry.hpp"
#include "scif/motion_model.hpp"
#include "scif/split_cif.hpp"

namespace scif::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Eigen::MatrixXd matrix(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = normal();
    return m;
  }

  // A A' / n scaled, plus a ridge so the result is well conditioned.
  Eigen::MatrixXd psd(Eigen::Index n, double scale = 1.0, double ridge = 1e-3) {
    const Eigen::MatrixXd a = matrix(n, n);
    Eigen::MatrixXd p = scale * (a * a.transpose()) / static_cast<double>(n);
    p += ridge * scale * Eigen::MatrixXd::Identity(n, n);
    return 0.5 * (p + p.transpose());
  }

  Pose2 pose(double extent = 10.0) {
    return {uniform(-extent, extent), uniform(-extent, extent),
            uniform(-std::numbers::pi, std::numbers::pi)};
  }

  Control control() {
    Control u;
    u.delta_d = uniform(-0.5, 0.5);
    u.delta_theta = uniform(-0.4, 0.4);
    u.beta = uniform(-1.2, 1.2);
    u.dt = 0.05;
    return u;
  }

  SplitState state(double scale = 0.1) {
    SplitState s;
    s.mean = pose();
    s.p_ind = psd(3, scale);
    s.p_dep = psd(3, scale);
    return s;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline double pose_error(const Pose2& a, const Pose2& b) {
  return pose_difference(a, b).cwiseAbs().maxCoeff();
}

}  // namespace scif::testing
