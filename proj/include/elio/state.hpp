#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "elio/manifold.hpp"

namespace elio {

enum class Mode { Inertial, NonInertial };

inline const char* to_string(Mode m) {
  return m == Mode::Inertial ? "inertial" : "non_inertial";
}

inline constexpr int kStateDim = 18;
inline constexpr int kNoiseDim = 13;

using ErrorState = Eigen::Matrix<double, kStateDim, 1>;
using Covariance = Eigen::Matrix<double, kStateDim, kStateDim>;

/// Fixed error-state layout: [dp, dtheta, dv, dba, dbg, dpEz, dvEz, daEz].
namespace idx {
inline constexpr int kPos = 0;
inline constexpr int kRot = 3;
inline constexpr int kVel = 6;
inline constexpr int kAccBias = 9;
inline constexpr int kGyroBias = 12;
inline constexpr int kElevatorPos = 15;
inline constexpr int kElevatorVel = 16;
inline constexpr int kElevatorAcc = 17;
inline constexpr int kRelativeDim = 15;
}  // namespace idx

/// Nominal filter state. Position, rotation and velocity are expressed in the
/// elevator frame while a ride is tracked and in the world frame otherwise;
/// the two coincide whenever the elevator scalars are zero.
struct FilterState {
  Vec3 position = Vec3::Zero();
  Rotation rotation = Rotation::Identity();
  Vec3 velocity = Vec3::Zero();
  Vec3 acc_bias = Vec3::Zero();
  Vec3 gyro_bias = Vec3::Zero();
  double elevator_pos = 0.0;  // vertical displacement, world frame [m]
  double elevator_vel = 0.0;  // [m/s]
  double elevator_acc = 0.0;  // [m/s^2]
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);  // fixed after initialization
  Mode mode = Mode::Inertial;
};

/// Continuous-time noise intensities plus measurement noise.
struct NoiseParams {
  double acc = 0.002;        // sigma_a
  double gyro = 0.005;       // sigma_w
  double acc_bias = 1e-4;    // sigma_ba
  double gyro_bias = 1e-5;   // sigma_bw
  double elevator_acc = 0.2; // sigma_aE
  double lidar = 0.05 * 0.05; // per point [m^2]

  bool valid() const {
    return acc > 0 && gyro > 0 && acc_bias > 0 && gyro_bias > 0 && elevator_acc > 0 && lidar > 0;
  }
};

struct Extrinsics {
  Rotation rotation = Rotation::Identity();  // LiDAR -> IMU
  Vec3 translation = Vec3::Zero();

  Vec3 lidar_to_imu(const Vec3& p_lidar) const { return rotation * p_lidar + translation; }
};

inline Vec3 compose_global_position(const FilterState& x) {
  return x.position + x.elevator_pos * Vec3::UnitZ();
}

inline FilterState default_state(double gravity_mag = 9.81) {
  FilterState x;
  x.gravity = Vec3(0.0, 0.0, -gravity_mag);
  return x;
}

inline FilterState boxplus(const FilterState& x, const ErrorState& d) {
  FilterState y = x;
  y.position += d.segment<3>(idx::kPos);
  const Vec3 dtheta = d.segment<3>(idx::kRot);
  if (!dtheta.isZero(0.0)) y.rotation = (x.rotation * exp_so3(dtheta)).normalized();
  y.velocity += d.segment<3>(idx::kVel);
  y.acc_bias += d.segment<3>(idx::kAccBias);
  y.gyro_bias += d.segment<3>(idx::kGyroBias);
  y.elevator_pos += d(idx::kElevatorPos);
  y.elevator_vel += d(idx::kElevatorVel);
  y.elevator_acc += d(idx::kElevatorAcc);
  return y;
}

/// x boxminus y, so that boxplus(y, boxminus(x, y)) == x.
inline ErrorState boxminus(const FilterState& x, const FilterState& y) {
  ErrorState d;
  d.segment<3>(idx::kPos) = x.position - y.position;
  d.segment<3>(idx::kRot) = log_so3(y.rotation.conjugate() * x.rotation);
  d.segment<3>(idx::kVel) = x.velocity - y.velocity;
  d.segment<3>(idx::kAccBias) = x.acc_bias - y.acc_bias;
  d.segment<3>(idx::kGyroBias) = x.gyro_bias - y.gyro_bias;
  d(idx::kElevatorPos) = x.elevator_pos - y.elevator_pos;
  d(idx::kElevatorVel) = x.elevator_vel - y.elevator_vel;
  d(idx::kElevatorAcc) = x.elevator_acc - y.elevator_acc;
  return d;
}

inline Covariance symmetrized(const Covariance& p) { return 0.5 * (p + p.transpose()); }

inline double asymmetry(const Covariance& p) { return (p - p.transpose()).cwiseAbs().maxCoeff(); }

inline double min_eigenvalue(const Covariance& p) {
  Eigen::SelfAdjointEigenSolver<Covariance> es(p, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

struct CovarianceHealth {
  double asymmetry = 0.0;
  double min_eigenvalue = 0.0;
  bool ok(double sym_tol = 1e-9, double eig_tol = -1e-12) const {
    return asymmetry <= sym_tol && min_eigenvalue >= eig_tol;
  }
};

inline CovarianceHealth covariance_health(const Covariance& p) {
  return {asymmetry(p), min_eigenvalue(p)};
}

}  // namespace elio
