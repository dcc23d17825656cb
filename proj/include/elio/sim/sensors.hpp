#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "elio/propagation.hpp"
#include "elio/scan_update.hpp"
#include "elio/sim/geometry.hpp"
#include "elio/sim/timeline.hpp"

namespace elio::sim {

using Rng = std::mt19937_64;

struct ImuErrorModel {
  double acc_std = 0.0;
  double gyro_std = 0.0;
  Vec3 acc_bias = Vec3::Zero();
  Vec3 gyro_bias = Vec3::Zero();
  Mat3 acc_axes = Mat3::Identity();  // accelerometer triad misalignment
};

/// Specific force and angular rate seen by a body following `x`. Noise is
/// drawn only when a generator is supplied.
inline ImuSample synth_imu(const TruthSample& x, const ImuErrorModel& m, Rng* rng = nullptr) {
  ImuSample u;
  u.t = x.t;
  u.acc = m.acc_axes * (x.rotation.conjugate() * (x.accel - x.gravity)) + m.acc_bias;
  u.gyro = x.angular + m.gyro_bias;
  if (rng) {
    std::normal_distribution<double> na(0.0, m.acc_std), ng(0.0, m.gyro_std);
    for (int i = 0; i < 3; ++i) u.acc(i) += na(*rng);
    for (int i = 0; i < 3; ++i) u.gyro(i) += ng(*rng);
  }
  return u;
}

/// Unit ray directions in the LiDAR frame. With a generator, the azimuth grid
/// gets a per-scan offset and every ray a random elevation inside its band.
inline std::vector<Vec3> ray_pattern(const LidarConfig& cfg, Rng* rng = nullptr) {
  std::vector<Vec3> dirs;
  dirs.reserve(static_cast<std::size_t>(cfg.azimuth_steps) * cfg.elevation_steps);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double az_step = 2.0 * std::numbers::pi / cfg.azimuth_steps;
  const double fov = cfg.fov_deg * std::numbers::pi / 180.0;
  const double az0 = rng ? unit(*rng) * az_step : 0.0;
  for (int i = 0; i < cfg.azimuth_steps; ++i) {
    const double az = az0 + i * az_step;
    for (int k = 0; k < cfg.elevation_steps; ++k) {
      const double frac = rng ? unit(*rng) : 0.5;
      const double el = -fov + 2.0 * fov * (k + frac) / cfg.elevation_steps;
      dirs.emplace_back(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
    }
  }
  return dirs;
}

/// Instantaneous scan from the IMU pose `x` (LiDAR axes parallel to the IMU's,
/// origin at `lidar_offset`). Points are in the LiDAR frame; misses are dropped.
inline Scan raycast_scan(const TruthSample& x, const Vec3& lidar_offset, std::span<const Vec3> dirs,
                         std::span<const Rect> surfaces, double range_noise, double max_range,
                         Rng* rng = nullptr) {
  Scan scan;
  scan.t = x.t;
  scan.points.reserve(dirs.size());
  const Vec3 origin = x.position + x.rotation * lidar_offset;
  const RayCaster caster(surfaces, origin);
  std::normal_distribution<double> noise(0.0, range_noise);
  for (const auto& d : dirs) {
    const auto t = caster.cast(x.rotation * d, max_range);
    if (!t) continue;
    double r = *t;
    if (rng && range_noise > 0.0) r += noise(*rng);
    scan.points.push_back(r * d);
  }
  return scan;
}

}  // namespace elio::sim
