#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include "elio/io.hpp"
#include "elio/sim/sensors.hpp"
#include "elio/sim/world.hpp"

namespace elio::sim {

struct GeneratorSinks {
  std::function<void(const SensorEvent&)> event;
  std::function<void(const GroundTruthRow&)> truth;
};

inline GroundTruthRow truth_row(const TruthSample& x) {
  return {x.t, x.position, x.rotation, x.elevator_pos, x.elevator_vel, x.elevator_acc, x.mode};
}

/// Emits the merged, time-ordered sensor stream (IMU first on equal stamps)
/// and ground truth at the IMU rate. Timestamps live on an integer microsecond
/// grid so the output is identical for identical scenarios.
inline void generate(const Scenario& s, const GeneratorSinks& sinks) {
  const Timeline tl(s);
  const auto building = building_surfaces(s);
  ImuErrorModel imu{s.imu.acc, s.imu.gyro, s.imu.acc_bias, s.imu.gyro_bias, tl.accel_misalignment()};
  Rng imu_rng(s.seed);
  Rng lidar_rng(s.seed ^ 0x9E3779B97F4A7C15ULL);

  const auto imu_dt = static_cast<std::int64_t>(std::llround(1e6 / s.imu_rate));
  const auto scan_dt = static_cast<std::int64_t>(std::llround(1e6 / s.lidar_rate));
  const auto end = static_cast<std::int64_t>(std::ceil(tl.end_time() * 1e6));
  std::int64_t next_imu = 0;
  std::int64_t next_scan = scan_dt;
  while (next_imu <= end || next_scan <= end) {
    if (next_imu <= next_scan && next_imu <= end) {
      const auto x = tl.at(static_cast<double>(next_imu) * 1e-6);
      if (sinks.event) sinks.event(synth_imu(x, imu, &imu_rng));
      if (sinks.truth) sinks.truth(truth_row(x));
      next_imu += imu_dt;
      continue;
    }
    if (next_scan > end) break;
    const double t = static_cast<double>(next_scan) * 1e-6;
    const auto x = tl.at(t);
    const auto surfaces = world_surfaces(tl, building, t);
    const auto dirs = ray_pattern(s.lidar, &lidar_rng);
    if (sinks.event) {
      sinks.event(raycast_scan(x, s.lidar.translation, dirs, surfaces, s.lidar.range_noise, s.lidar.max_range,
                               &lidar_rng));
    }
    next_scan += scan_dt;
  }
}

/// Writes `sequence.jsonl` and `ground_truth.csv` into `dir`.
inline void write_generated(const Scenario& s, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto base = std::filesystem::path(dir);
  std::ofstream seq(base / "sequence.jsonl");
  std::ofstream gt(base / "ground_truth.csv");
  if (!seq || !gt) throw Error(ErrorKind::ConfigError, "cannot write into " + dir);
  gt << kGroundTruthHeader << '\n';
  generate(s, {[&](const SensorEvent& e) { seq << to_jsonl(e) << '\n'; },
               [&](const GroundTruthRow& r) { gt << to_csv(r) << '\n'; }});
}

}  // namespace elio::sim
