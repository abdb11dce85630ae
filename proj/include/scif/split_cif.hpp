#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "scif/geometry.hpp"
#include "scif/motion_model.hpp"

namespace scif {

/// Pose estimate whose covariance is split into a part known to be
/// independent of incoming measurements and a part with unknown correlation.
struct SplitState {
  Pose2 mean;
  Mat3 p_ind = Mat3::Zero();
  Mat3 p_dep = Mat3::Zero();
  std::int64_t epoch = 0;

  Mat3 total() const { return p_ind + p_dep; }
};

/// Measurement noise in split form; both blocks are m x m.
struct SplitNoise {
  Eigen::MatrixXd r_ind;
  Eigen::MatrixXd r_dep;

  static SplitNoise independent(const Eigen::MatrixXd& r) {
    return {r, Eigen::MatrixXd::Zero(r.rows(), r.cols())};
  }
  /// r_dep = share * r, r_ind = (1 - share) * r.
  static SplitNoise with_share(const Eigen::MatrixXd& r, double share) {
    return {(1.0 - share) * r, share * r};
  }
};

/// Linear(ized) measurement z ~ h * x. Innovation components listed in
/// angle_rows are angles and are wrapped before the gain is applied.
struct LinearMeasurement {
  Eigen::VectorXd z;
  Eigen::MatrixXd h;
  std::vector<Eigen::Index> angle_rows;
};

/// Row-wise concatenation of independent measurements of the same state.
LinearMeasurement stack_measurements(std::span<const LinearMeasurement> parts);
/// Block-diagonal noise matching stack_measurements.
SplitNoise stack_noise(std::span<const SplitNoise> parts);

SplitState predict(const SplitState& state, const Control& u, const Mat2& q,
                   const Mat3& p_pre_ind);

inline SplitState predict(const SplitState& state, const Control& u,
                          const ProcessNoiseConfig& noise) {
  return predict(state, u, noise.q, noise.p_pre_ind);
}

/// trace of the fused covariance for a given omega; +inf when the
/// innovation covariance is not positive definite.
double fused_trace(const Mat3& p_ind, const Mat3& p_dep, const SplitNoise& noise,
                   const Eigen::MatrixXd& h, double omega);

/// Omega in [0, 1] minimizing fused_trace. Golden-section search on
/// [1e-3, 1 - 1e-3], then checked against the ends and omega = 1 (zero gain
/// when r_dep != 0, so the fused trace never exceeds the prior's). The
/// degenerate cases where a dependent block vanishes are resolved exactly.
double optimize_omega(const Mat3& p_ind, const Mat3& p_dep,
                      const SplitNoise& noise, const Eigen::MatrixXd& h);

/// Split CIF update at a fixed omega. Throws Error(kSingularInnovation) when
/// the innovation covariance has condition number above 1e12.
SplitState update_split(const SplitState& state, const LinearMeasurement& meas,
                        const SplitNoise& noise, double omega);

/// optimize_omega followed by update_split.
SplitState fuse(const SplitState& state, const LinearMeasurement& meas,
                const SplitNoise& noise);

}  // namespace scif
