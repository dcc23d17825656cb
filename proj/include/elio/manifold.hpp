#pragma once

#include <cmath>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace elio {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
/// Hamilton unit quaternion, (w, x, y, z).
using Rotation = Eigen::Quaterniond;

inline constexpr double kSmallAngle = 1e-8;

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

/// Exponential map so(3) -> SO(3).
inline Rotation exp_so3(const Vec3& omega) {
  const double theta = omega.norm();
  if (theta < kSmallAngle) {
    const double t2 = theta * theta;
    Rotation q(1.0 - t2 / 8.0, 0.0, 0.0, 0.0);
    q.vec() = 0.5 * (1.0 - t2 / 24.0) * omega;
    return q.normalized();
  }
  const double half = 0.5 * theta;
  Rotation q;
  q.w() = std::cos(half);
  q.vec() = (std::sin(half) / theta) * omega;
  return q;
}

/// Logarithm SO(3) -> so(3); result norm lies in [0, pi].
inline Vec3 log_so3(const Rotation& rotation) {
  Rotation q = rotation.normalized();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const double n = q.vec().norm();
  if (n < kSmallAngle) {
    // atan2(n, w) / n -> 1/w - n^2/(3 w^3)
    const double w = q.w();
    return (2.0 / w) * (1.0 - n * n / (3.0 * w * w)) * q.vec();
  }
  const double theta = 2.0 * std::atan2(n, q.w());
  return (theta / n) * q.vec();
}

/// Rotation from an orthonormal matrix. Eigen uses Shepperd's largest-diagonal
/// branch, which keeps the pi-rotation case well conditioned.
inline Rotation rotation_from_matrix(const Mat3& m) {
  return Rotation(m).normalized();
}

/// Right Jacobian of SO(3): Log(Exp(t)^-1 Exp(t + d)) ~= Jr(t) d.
inline Mat3 right_jacobian_so3(const Vec3& theta) {
  const double a = theta.norm();
  const Mat3 k = skew(theta);
  if (a < kSmallAngle) {
    return Mat3::Identity() - 0.5 * k + (1.0 / 6.0) * k * k;
  }
  const double a2 = a * a;
  return Mat3::Identity() - ((1.0 - std::cos(a)) / a2) * k +
         ((a - std::sin(a)) / (a2 * a)) * k * k;
}

inline Mat3 right_jacobian_inv_so3(const Vec3& theta) {
  const double a = theta.norm();
  const Mat3 k = skew(theta);
  if (a < kSmallAngle) {
    return Mat3::Identity() + 0.5 * k + (1.0 / 12.0) * k * k;
  }
  const double a2 = a * a;
  const double c = 1.0 / a2 - (1.0 + std::cos(a)) / (2.0 * a * std::sin(a));
  return Mat3::Identity() + 0.5 * k + c * k * k;
}

/// Minimal rotation taking unit direction `from` onto unit direction `to`.
inline Rotation rotation_between(const Vec3& from, const Vec3& to) {
  return Rotation::FromTwoVectors(from, to).normalized();
}

}  // namespace elio
