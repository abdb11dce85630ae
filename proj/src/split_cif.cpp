#include "scif/split_cif.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "scif/error.hpp"

namespace scif {

namespace {

constexpr double kOmegaLow = 1e-3;
constexpr double kOmegaHigh = 1.0 - 1e-3;
constexpr double kOmegaTol = 1e-4;
constexpr double kMaxCondition = 1e12;
constexpr double kTieTol = 1e-12;

bool is_zero(const Eigen::MatrixXd& m) {
  return m.size() == 0 || m.cwiseAbs().maxCoeff() == 0.0;
}

// m / w, where a zero block stays zero for every w (including w = 0).
Eigen::MatrixXd inflate(const Eigen::MatrixXd& m, double w) {
  if (is_zero(m)) return Eigen::MatrixXd::Zero(m.rows(), m.cols());
  if (!(w > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "split update: omega leaves a nonzero dependent block unbounded");
  }
  return m / w;
}

struct Gain {
  Eigen::MatrixXd p1;
  Eigen::MatrixXd k;
};

// False when S is not positive definite or too ill-conditioned.
bool compute_gain(const Mat3& p_ind, const Mat3& p_dep, const SplitNoise& noise,
                  const Eigen::MatrixXd& h, double omega, Gain& out) {
  out.p1 = inflate(p_dep, omega) + p_ind;
  // omega = 1 with dependent measurement noise is the limit where the
  // measurement carries no information: zero gain.
  if (omega >= 1.0 && !is_zero(noise.r_dep)) {
    out.k = Eigen::MatrixXd::Zero(3, h.rows());
    return true;
  }
  const Eigen::MatrixXd p2 = inflate(noise.r_dep, 1.0 - omega) + noise.r_ind;
  const Eigen::MatrixXd s = symmetrize(h * out.p1 * h.transpose() + p2);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxCondition) return false;

  // K = P1 H' S^-1  <=>  K' = S^-1 H P1
  out.k = s.ldlt().solve(h * out.p1).transpose();
  return true;
}

}  // namespace

LinearMeasurement stack_measurements(std::span<const LinearMeasurement> parts) {
  Eigen::Index rows = 0;
  for (const LinearMeasurement& m : parts) rows += m.z.size();
  LinearMeasurement out;
  out.z.resize(rows);
  out.h.resize(rows, 3);
  Eigen::Index at = 0;
  for (const LinearMeasurement& m : parts) {
    out.z.segment(at, m.z.size()) = m.z;
    out.h.middleRows(at, m.z.size()) = m.h;
    for (const Eigen::Index r : m.angle_rows) out.angle_rows.push_back(at + r);
    at += m.z.size();
  }
  return out;
}

SplitNoise stack_noise(std::span<const SplitNoise> parts) {
  Eigen::Index rows = 0;
  for (const SplitNoise& n : parts) rows += n.r_ind.rows();
  SplitNoise out{Eigen::MatrixXd::Zero(rows, rows), Eigen::MatrixXd::Zero(rows, rows)};
  Eigen::Index at = 0;
  for (const SplitNoise& n : parts) {
    const Eigen::Index m = n.r_ind.rows();
    out.r_ind.block(at, at, m, m) = n.r_ind;
    out.r_dep.block(at, at, m, m) = n.r_dep;
    at += m;
  }
  return out;
}

SplitState predict(const SplitState& state, const Control& u, const Mat2& q,
                   const Mat3& p_pre_ind) {
  const Mat3 gx = jacobian_state(state.mean, u);
  const Mat32 gu = jacobian_control(state.mean, u);

  SplitState next;
  next.mean = evolve(state.mean, u);
  next.p_ind = symmetrize(gx * state.p_ind * gx.transpose() +
                          gu * q * gu.transpose() + p_pre_ind);
  next.p_dep = symmetrize(gx * state.p_dep * gx.transpose());
  next.epoch = state.epoch + 1;
  return next;
}

double fused_trace(const Mat3& p_ind, const Mat3& p_dep, const SplitNoise& noise,
                   const Eigen::MatrixXd& h, double omega) {
  Gain g;
  if (!compute_gain(p_ind, p_dep, noise, h, omega, g)) {
    return std::numeric_limits<double>::infinity();
  }
  const Eigen::MatrixXd ikh = Eigen::MatrixXd::Identity(3, 3) - g.k * h;
  return (ikh * g.p1).trace();
}

double optimize_omega(const Mat3& p_ind, const Mat3& p_dep,
                      const SplitNoise& noise, const Eigen::MatrixXd& h) {
  const bool state_dep_zero = is_zero(p_dep);
  const bool meas_dep_zero = is_zero(noise.r_dep);
  // With no dependent measurement noise the objective decreases in omega;
  // with no dependent state part it increases. Both zero: omega is immaterial.
  if (meas_dep_zero) return 1.0;
  if (state_dep_zero) return 0.0;

  auto f = [&](double w) { return fused_trace(p_ind, p_dep, noise, h, w); };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = kOmegaLow;
  double b = kOmegaHigh;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  // Differences at rounding level count as ties. For a convex objective a
  // tie puts the minimizer between the probes, so a flat objective settles
  // on the midpoint instead of drifting to an end.
  auto tie = [](double u, double v) {
    return std::abs(u - v) <= kTieTol * std::max(std::abs(u), std::abs(v));
  };
  while (b - a > kOmegaTol) {
    if (tie(fc, fd)) {
      a = c;
      b = d;
      c = b - inv_phi * (b - a);
      d = a + inv_phi * (b - a);
      fc = f(c);
      fd = f(d);
    } else if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  double best = 0.5 * (a + b);
  double f_best = f(best);
  for (double endpoint : {kOmegaLow, kOmegaHigh, 1.0}) {
    const double fe = f(endpoint);
    if (fe < f_best && !tie(fe, f_best)) {
      best = endpoint;
      f_best = fe;
    }
  }
  return best;
}

SplitState update_split(const SplitState& state, const LinearMeasurement& meas,
                        const SplitNoise& noise, double omega) {
  const Eigen::MatrixXd& h = meas.h;
  Gain g;
  if (!compute_gain(state.p_ind, state.p_dep, noise, h, omega, g)) {
    throw Error(ErrorCode::kSingularInnovation,
                "split update: innovation covariance is ill-conditioned");
  }

  const Vec3 x = state.mean.vector();
  Eigen::VectorXd innovation = meas.z - h * x;
  for (const Eigen::Index row : meas.angle_rows) {
    innovation(row) = wrap_angle(innovation(row));
  }

  const Eigen::MatrixXd ikh = Eigen::MatrixXd::Identity(3, 3) - g.k * h;
  const Eigen::MatrixXd p = symmetrize(ikh * g.p1);

  SplitState out;
  out.mean = Pose2(Vec3(x + g.k * innovation));
  out.p_ind = symmetrize(ikh * state.p_ind * ikh.transpose() +
                         g.k * noise.r_ind * g.k.transpose());
  out.p_dep = floor_psd(p - out.p_ind);
  out.epoch = state.epoch;
  return out;
}

SplitState fuse(const SplitState& state, const LinearMeasurement& meas,
                const SplitNoise& noise) {
  const double omega = optimize_omega(state.p_ind, state.p_dep, noise, meas.h);
  return update_split(state, meas, noise, omega);
}

}  // namespace scif
