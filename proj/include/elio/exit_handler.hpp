#pragma once

#include <Eigen/Core>
#include <Eigen/LU>

#include "elio/state.hpp"

namespace elio {

struct ExitConfig {
  Eigen::Vector2d zupt_noise{1e-5, 1e-4};           // (r_v, r_a)
  Eigen::Vector3d reset_prior{1e-6, 1e-6, 1e-6};    // p_Ez, v_Ez, a_Ez variances

  bool valid() const { return zupt_noise.minCoeff() > 0 && reset_prior.minCoeff() > 0; }
};

struct StateAndCovariance {
  FilterState state;
  Covariance covariance;
};

/// Stationary-elevator pseudo-measurement: v_Ez = 0 and a_Ez = 0.
inline StateAndCovariance zero_state_update(const FilterState& x, const Covariance& p,
                                            const ExitConfig& cfg) {
  Eigen::Matrix<double, 2, kStateDim> h = Eigen::Matrix<double, 2, kStateDim>::Zero();
  h(0, idx::kElevatorVel) = 1.0;
  h(1, idx::kElevatorAcc) = 1.0;
  const Eigen::Vector2d r(-x.elevator_vel, -x.elevator_acc);
  const Eigen::Matrix2d noise = cfg.zupt_noise.asDiagonal();
  const Eigen::Matrix2d s = h * p * h.transpose() + noise;
  const Eigen::Matrix<double, kStateDim, 2> k = p * h.transpose() * s.inverse();
  const ErrorState dx = k * r;
  const Covariance ikh = Covariance::Identity() - k * h;
  const Covariance joseph = ikh * p * ikh.transpose() + k * noise * k.transpose();
  return {boxplus(x, dx), symmetrized(joseph)};
}

/// Absorbs the elevator displacement into the position and returns to the
/// inertial formulation. The composed global position is unchanged.
inline FilterState reanchor(const FilterState& x) {
  FilterState y = x;
  y.position.z() += x.elevator_pos;
  y.elevator_pos = 0.0;
  y.elevator_vel = 0.0;
  y.elevator_acc = 0.0;
  y.mode = Mode::Inertial;
  return y;
}

/// Decouples the elevator block and re-seeds its variances.
inline Covariance reset_covariance(const Covariance& p, const ExitConfig& cfg) {
  Covariance out = p;
  constexpr int e = idx::kElevatorPos;
  out.block<3, kStateDim>(e, 0).setZero();
  out.block<kStateDim, 3>(0, e).setZero();
  for (int i = 0; i < 3; ++i) out(e + i, e + i) = cfg.reset_prior(i);
  return out;
}

}  // namespace elio
