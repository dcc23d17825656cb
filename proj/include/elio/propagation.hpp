#pragma once

#include <string>

#include "elio/errors.hpp"
#include "elio/state.hpp"

namespace elio {

inline constexpr double kMaxImuGap = 0.05;  // [s]

struct ImuSample {
  double t = 0.0;
  Vec3 acc = Vec3::Zero();   // specific force [m/s^2]
  Vec3 gyro = Vec3::Zero();  // [rad/s]
};

using TransitionMatrix = Eigen::Matrix<double, kStateDim, kStateDim>;
using NoiseInjection = Eigen::Matrix<double, kStateDim, kNoiseDim>;
using ProcessNoise = Eigen::Matrix<double, kNoiseDim, 1>;  // diagonal of Q_w

struct TransitionMatrices {
  TransitionMatrix fx = TransitionMatrix::Identity();
  NoiseInjection fw = NoiseInjection::Zero();
  ProcessNoise qw = ProcessNoise::Zero();
};

inline void check_step(double dt) {
  if (!(dt > 0.0)) {
    throw Error(ErrorKind::NonMonotonicTime, "propagation step " + std::to_string(dt) + " s");
  }
  if (dt > kMaxImuGap) {
    throw Error(ErrorKind::DataGap, "IMU gap of " + std::to_string(dt) + " s");
  }
}

/// Acceleration of the IMU relative to the elevator frame. The transport term is
/// only active while a ride is tracked.
inline Vec3 effective_relative_accel(const FilterState& x, const ImuSample& u) {
  Vec3 a = x.rotation * (u.acc - x.acc_bias) + x.gravity;
  if (x.mode == Mode::NonInertial) a.z() -= x.elevator_acc;
  return a;
}

/// Zero-order-hold nominal propagation over [t, t + dt] using sample `u`.
inline FilterState propagate_nominal(const FilterState& x, const ImuSample& u, double dt) {
  check_step(dt);
  const Vec3 a = effective_relative_accel(x, u);
  FilterState y = x;
  y.position = x.position + x.velocity * dt + 0.5 * a * dt * dt;
  y.rotation = (x.rotation * exp_so3((u.gyro - x.gyro_bias) * dt)).normalized();
  y.velocity = x.velocity + a * dt;
  if (x.mode == Mode::NonInertial) {
    y.elevator_pos = x.elevator_pos + x.elevator_vel * dt + 0.5 * x.elevator_acc * dt * dt;
    y.elevator_vel = x.elevator_vel + x.elevator_acc * dt;
  }
  return y;
}

inline TransitionMatrices build_transition(const FilterState& x, const ImuSample& u, double dt,
                                           const NoiseParams& noise) {
  check_step(dt);
  using namespace idx;
  const Mat3 r = x.rotation.toRotationMatrix();
  const Vec3 acc_hat = u.acc - x.acc_bias;
  const Vec3 gyro_hat = u.gyro - x.gyro_bias;
  const Mat3 r_acc = r * skew(acc_hat);
  const double dt2 = dt * dt;
  const bool elevator = x.mode == Mode::NonInertial;

  TransitionMatrices m;
  auto& f = m.fx;
  f.block<3, 3>(kPos, kRot) = -0.5 * r_acc * dt2;
  f.block<3, 3>(kPos, kVel) = Mat3::Identity() * dt;
  f.block<3, 3>(kPos, kAccBias) = -0.5 * r * dt2;
  f.block<3, 3>(kRot, kRot) = exp_so3(-gyro_hat * dt).toRotationMatrix();
  f.block<3, 3>(kRot, kGyroBias) = -Mat3::Identity() * dt;
  f.block<3, 3>(kVel, kRot) = -r_acc * dt;
  f.block<3, 3>(kVel, kAccBias) = -r * dt;
  if (elevator) {
    f(kPos + 2, kElevatorAcc) = -0.5 * dt2;
    f(kVel + 2, kElevatorAcc) = -dt;
    f(kElevatorPos, kElevatorVel) = dt;
    f(kElevatorPos, kElevatorAcc) = 0.5 * dt2;
    f(kElevatorVel, kElevatorAcc) = dt;
  }

  auto& g = m.fw;
  g.block<3, 3>(kRot, 3) = -Mat3::Identity();
  g.block<3, 3>(kVel, 0) = -r;
  g.block<3, 3>(kAccBias, 6) = Mat3::Identity();
  g.block<3, 3>(kGyroBias, 9) = Mat3::Identity();
  if (elevator) g(kElevatorAcc, 12) = 1.0;

  auto sq = [](double s) { return s * s; };
  m.qw.segment<3>(0).setConstant(sq(noise.acc) * dt);
  m.qw.segment<3>(3).setConstant(sq(noise.gyro) * dt);
  m.qw.segment<3>(6).setConstant(sq(noise.acc_bias) * dt);
  m.qw.segment<3>(9).setConstant(sq(noise.gyro_bias) * dt);
  m.qw(12) = elevator ? sq(noise.elevator_acc) * dt : 0.0;
  return m;
}

inline Covariance propagate_covariance(const Covariance& p, const TransitionMatrices& m) {
  const Covariance next = m.fx * p * m.fx.transpose() + m.fw * m.qw.asDiagonal() * m.fw.transpose();
  return symmetrized(next);
}

}  // namespace elio
