#pragma once

#include <algorithm>
#include <cmath>

namespace elio::sim {

struct Kinematics {
  double s = 0.0;  // position
  double v = 0.0;
  double a = 0.0;
};

/// Symmetric trapezoidal velocity profile covering `travel` (triangular when
/// v_max is not reached). Time starts at 0; the sign of travel sets the direction.
struct TrapezoidProfile {
  double travel = 0.0;
  double a_max = 1.0;
  double v_peak = 0.0;   // reached speed (magnitude)
  double t_acc = 0.0;
  double t_cruise = 0.0;

  double duration() const { return 2.0 * t_acc + t_cruise; }

  Kinematics at(double t) const {
    const double dir = travel < 0.0 ? -1.0 : 1.0;
    const double dist = std::abs(travel);
    Kinematics k;
    if (dist == 0.0 || t < 0.0) return k;
    const double t1 = t_acc;
    const double t2 = t_acc + t_cruise;
    const double t3 = duration();
    if (t < t1) {
      k = {0.5 * a_max * t * t, a_max * t, a_max};
    } else if (t < t2) {
      const double d = t - t1;
      k = {0.5 * a_max * t1 * t1 + v_peak * d, v_peak, 0.0};
    } else if (t < t3) {
      const double r = t3 - t;
      k = {dist - 0.5 * a_max * r * r, a_max * r, -a_max};
    } else {
      k = {dist, 0.0, 0.0};
    }
    return {dir * k.s, dir * k.v, dir * k.a};
  }
};

inline TrapezoidProfile trapezoid_profile(double travel, double a_max, double v_max) {
  TrapezoidProfile p;
  p.travel = travel;
  p.a_max = a_max;
  const double dist = std::abs(travel);
  if (dist == 0.0) return p;
  const double v_tri = std::sqrt(a_max * dist);
  if (v_tri <= v_max) {
    p.v_peak = v_tri;
    p.t_acc = v_tri / a_max;
  } else {
    p.v_peak = v_max;
    p.t_acc = v_max / a_max;
    p.t_cruise = (dist - v_max * v_max / a_max) / v_max;
  }
  return p;
}

/// Quintic minimum-jerk blend from 0 to 1 over [0, 1]; zero velocity and
/// acceleration at both ends.
inline Kinematics min_jerk(double tau) {
  tau = std::clamp(tau, 0.0, 1.0);
  const double t2 = tau * tau;
  const double t3 = t2 * tau;
  return {t3 * (10.0 - 15.0 * tau + 6.0 * t2), 30.0 * t2 * (1.0 - 2.0 * tau + t2),
          60.0 * tau * (1.0 - 3.0 * tau + 2.0 * t2)};
}

}  // namespace elio::sim
