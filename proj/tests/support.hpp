#pragma once

#include <random>
#include <vector>

#include <Eigen/QR>

#include "elio/evaluate.hpp"
#include "elio/pipeline.hpp"
#include "elio/sim/generate.hpp"

namespace elio::test {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline Vec3 random_vec(Rng& rng, double scale) {
  return {uniform(rng, -scale, scale), uniform(rng, -scale, scale), uniform(rng, -scale, scale)};
}

/// Rotation from the QR factor of a Gaussian matrix, independent of exp_so3.
inline Mat3 random_rotation_matrix(Rng& rng) {
  std::normal_distribution<double> n;
  Mat3 a;
  for (int i = 0; i < 9; ++i) a(i) = n(rng);
  Eigen::HouseholderQR<Mat3> qr(a);
  Mat3 q = qr.householderQ();
  const Mat3 r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < 3; ++i) {
    if (r(i, i) < 0) q.col(i) *= -1.0;
  }
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

inline FilterState random_state(Rng& rng, Mode mode) {
  FilterState x;
  x.position = random_vec(rng, 5.0);
  x.rotation = rotation_from_matrix(random_rotation_matrix(rng));
  x.velocity = random_vec(rng, 1.0);
  x.acc_bias = random_vec(rng, 0.05);
  x.gyro_bias = random_vec(rng, 0.01);
  x.mode = mode;
  if (mode == Mode::NonInertial) {
    x.elevator_pos = uniform(rng, -6.0, 6.0);
    x.elevator_vel = uniform(rng, -1.5, 1.5);
    x.elevator_acc = uniform(rng, -1.0, 1.0);
  }
  return x;
}

/// Random SPD matrix with the given diagonal scale.
inline Covariance random_covariance(Rng& rng, double scale = 1e-2) {
  Covariance a;
  for (int i = 0; i < a.size(); ++i) a(i) = uniform(rng, -1.0, 1.0);
  return scale * (a * a.transpose() / kStateDim + 0.1 * Covariance::Identity());
}

/// Central differences of propagate_nominal composed with boxplus.
inline TransitionMatrix numeric_transition(const FilterState& x, const ImuSample& u, double dt, double h = 1e-6) {
  TransitionMatrix f;
  const FilterState y0 = propagate_nominal(x, u, dt);
  for (int j = 0; j < kStateDim; ++j) {
    ErrorState d = ErrorState::Zero();
    d(j) = h;
    const ErrorState plus = boxminus(propagate_nominal(boxplus(x, d), u, dt), y0);
    const ErrorState minus = boxminus(propagate_nominal(boxplus(x, -d), u, dt), y0);
    f.col(j) = (plus - minus) / (2.0 * h);
  }
  return f;
}

/// Central differences of point_residual over boxplus.
inline JacobianRow numeric_point_jacobian(const FilterState& x, const Extrinsics& ext, const PlaneMatch& m,
                                          const Vec3& p_lidar, double h = 1e-6) {
  JacobianRow row;
  for (int j = 0; j < kStateDim; ++j) {
    ErrorState d = ErrorState::Zero();
    d(j) = h;
    row(j) = (point_residual(boxplus(x, d), ext, m, p_lidar) - point_residual(boxplus(x, -d), ext, m, p_lidar)) /
             (2.0 * h);
  }
  return row;
}

/// IMU sample consistent with a slowly moving platform.
inline ImuSample random_imu(Rng& rng, const FilterState& x) {
  ImuSample u;
  u.acc = x.rotation.conjugate() * (-x.gravity) + random_vec(rng, 2.0);
  u.gyro = random_vec(rng, 0.5 / std::sqrt(3.0));
  return u;
}

struct SimRun {
  std::vector<TrajectoryRecord> traj;
  std::vector<GroundTruthRow> gt;
  std::vector<ScanDiagnostics> scans;  // one per emitted record
  std::vector<AdaptiveVoxelState> voxels;
  RunStats stats;
  bool aborted = false;
};

/// Generates the scenario and feeds it straight into an estimator.
inline SimRun simulate_and_run(const sim::Scenario& s, const RunConfig& cfg = {},
                               const Estimator::CovarianceHook& hook = {}) {
  SimRun out;
  Estimator est(cfg, [&](const TrajectoryRecord& r) { out.traj.push_back(r); });
  if (hook) est.set_covariance_hook(hook);
  try {
    sim::generate(s, {[&](const SensorEvent& e) {
                        const auto before = out.traj.size();
                        est.process(e);
                        if (out.traj.size() > before) {
                          out.scans.push_back(est.last_scan());
                          out.voxels.push_back(est.voxel());
                        }
                      },
                      [&](const GroundTruthRow& r) { out.gt.push_back(r); }});
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateStreak && e.kind() != ErrorKind::DataGap) throw;
    out.aborted = true;
  }
  out.stats = est.stats();
  return out;
}

}  // namespace elio::test
