#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "elio/errors.hpp"
#include "elio/manifold.hpp"

namespace elio::sim {

struct PerturbationConfig {
  double gravity_drift_deg = 0.0;  // total drift per ride
  double cabin_pitch_deg = 0.0;
  double init_misalign_deg = 0.0;

  bool valid() const { return gravity_drift_deg >= 0 && cabin_pitch_deg >= 0 && init_misalign_deg >= 0; }
  bool operator==(const PerturbationConfig&) const = default;
};

enum class PerturbationType { GravityDrift, CabinPitch, InitMisalign, Combined };

/// Small / medium / large levels (1..3); level 0 is unperturbed.
inline PerturbationConfig perturbation_level(PerturbationType type, int level) {
  static constexpr double kDrift[] = {0.0, 0.10, 0.30, 0.80};
  static constexpr double kPitch[] = {0.0, 0.30, 1.00, 3.00};
  static constexpr double kMisalign[] = {0.0, 0.50, 1.50, 4.00};
  PerturbationConfig c;
  const bool all = type == PerturbationType::Combined;
  if (all || type == PerturbationType::GravityDrift) c.gravity_drift_deg = kDrift[level];
  if (all || type == PerturbationType::CabinPitch) c.cabin_pitch_deg = kPitch[level];
  if (all || type == PerturbationType::InitMisalign) c.init_misalign_deg = kMisalign[level];
  return c;
}

struct RideSpec {
  int to_floor = 1;
  double a_max = 1.0;  // [m/s^2]
  double v_max = 1.0;  // [m/s]
};

struct Timing {
  double initial_static = 3.0;  // standing still before the first walk [s]
  double walk = 4.0;            // hall waypoint <-> cabin center
  double dwell = 1.0;           // in cabin before the door closes
  double start_delay = 3.0;     // door closed -> cabin starts moving
  double open_delay = 1.0;      // cabin stops -> door opens
  double exit_delay = 2.5;      // cabin stops -> robot starts walking out
  double hall_wait = 3.0;       // in the hall between rides
  double tail = 3.0;            // standing still at the end
};

struct ImuNoise {
  double acc = 0.01;    // white noise std per sample [m/s^2]
  double gyro = 0.001;  // [rad/s]
  Vec3 acc_bias{0.01, -0.008, 0.005};
  Vec3 gyro_bias{0.001, -0.002, 0.0005};
};

struct LidarConfig {
  int azimuth_steps = 360;
  int elevation_steps = 16;
  double fov_deg = 45.0;       // elevation half-angle
  double range_noise = 0.01;   // [m]
  double max_range = 100.0;
  Vec3 translation{0.05, 0.0, 0.1};  // LiDAR origin in the IMU frame
};

struct Scenario {
  std::uint64_t seed = 1;
  int floors = 2;
  int start_floor = 0;
  double floor_height = 3.0;
  double slab = 0.5;
  double gravity = 9.81;
  double imu_rate = 200.0;
  double lidar_rate = 10.0;
  double imu_height = 0.5;        // above the floor surface
  double hall_yaw = 0.3;          // yaw excursion while waiting in the hall [rad]
  Vec3 hall_waypoint{-4.0, 0.0, 0.0};
  Timing timing;
  ImuNoise imu;
  LidarConfig lidar;
  PerturbationConfig perturbation;
  std::vector<RideSpec> rides{RideSpec{}};
};

/// Returns a copy carrying the requested perturbation magnitudes.
inline Scenario apply_perturbations(Scenario s, const PerturbationConfig& cfg) {
  if (!cfg.valid()) throw Error(ErrorKind::ConfigError, "negative perturbation angle");
  s.perturbation = cfg;
  return s;
}

namespace detail {

inline Vec3 vec3_or(const nlohmann::json& j, const char* key, const Vec3& def) {
  if (!j.contains(key)) return def;
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3) throw Error(ErrorKind::ConfigError, std::string(key) + " must be [x,y,z]");
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

inline nlohmann::json vec3_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

}  // namespace detail

inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  try {
    s.seed = j.value("seed", s.seed);
    s.floors = j.value("floors", s.floors);
    s.start_floor = j.value("start_floor", s.start_floor);
    s.floor_height = j.value("floor_height", s.floor_height);
    s.slab = j.value("slab", s.slab);
    s.gravity = j.value("gravity", s.gravity);
    s.imu_rate = j.value("imu_rate", s.imu_rate);
    s.lidar_rate = j.value("lidar_rate", s.lidar_rate);
    s.imu_height = j.value("imu_height", s.imu_height);
    s.hall_yaw = j.value("hall_yaw", s.hall_yaw);
    s.hall_waypoint = detail::vec3_or(j, "hall_waypoint", s.hall_waypoint);
    if (j.contains("timing")) {
      const auto& t = j.at("timing");
      auto& d = s.timing;
      d.initial_static = t.value("initial_static", d.initial_static);
      d.walk = t.value("walk", d.walk);
      d.dwell = t.value("dwell", d.dwell);
      d.start_delay = t.value("start_delay", d.start_delay);
      d.open_delay = t.value("open_delay", d.open_delay);
      d.exit_delay = t.value("exit_delay", d.exit_delay);
      d.hall_wait = t.value("hall_wait", d.hall_wait);
      d.tail = t.value("tail", d.tail);
    }
    if (j.contains("imu_noise")) {
      const auto& n = j.at("imu_noise");
      s.imu.acc = n.value("acc", s.imu.acc);
      s.imu.gyro = n.value("gyro", s.imu.gyro);
      s.imu.acc_bias = detail::vec3_or(n, "acc_bias", s.imu.acc_bias);
      s.imu.gyro_bias = detail::vec3_or(n, "gyro_bias", s.imu.gyro_bias);
    }
    if (j.contains("lidar")) {
      const auto& l = j.at("lidar");
      s.lidar.azimuth_steps = l.value("azimuth_steps", s.lidar.azimuth_steps);
      s.lidar.elevation_steps = l.value("elevation_steps", s.lidar.elevation_steps);
      s.lidar.fov_deg = l.value("fov_deg", s.lidar.fov_deg);
      s.lidar.range_noise = l.value("range_noise", s.lidar.range_noise);
      s.lidar.max_range = l.value("max_range", s.lidar.max_range);
      s.lidar.translation = detail::vec3_or(l, "translation", s.lidar.translation);
    }
    if (j.contains("perturbation")) {
      const auto& p = j.at("perturbation");
      s.perturbation.gravity_drift_deg = p.value("gravity_drift_deg", 0.0);
      s.perturbation.cabin_pitch_deg = p.value("cabin_pitch_deg", 0.0);
      s.perturbation.init_misalign_deg = p.value("init_misalign_deg", 0.0);
    }
    if (j.contains("rides")) {
      s.rides.clear();
      const RideSpec def{};
      const double a_def = j.value("a_max", def.a_max);
      const double v_def = j.value("v_max", def.v_max);
      for (const auto& r : j.at("rides")) {
        s.rides.push_back({r.at("to_floor").get<int>(), r.value("a_max", a_def), r.value("v_max", v_def)});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, e.what());
  }
  return s;
}

inline nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json j;
  j["seed"] = s.seed;
  j["floors"] = s.floors;
  j["start_floor"] = s.start_floor;
  j["floor_height"] = s.floor_height;
  j["slab"] = s.slab;
  j["gravity"] = s.gravity;
  j["imu_rate"] = s.imu_rate;
  j["lidar_rate"] = s.lidar_rate;
  j["imu_height"] = s.imu_height;
  j["hall_yaw"] = s.hall_yaw;
  j["hall_waypoint"] = detail::vec3_json(s.hall_waypoint);
  const auto& t = s.timing;
  j["timing"] = {{"initial_static", t.initial_static}, {"walk", t.walk}, {"dwell", t.dwell},
                 {"start_delay", t.start_delay}, {"open_delay", t.open_delay},
                 {"exit_delay", t.exit_delay}, {"hall_wait", t.hall_wait}, {"tail", t.tail}};
  j["imu_noise"] = {{"acc", s.imu.acc}, {"gyro", s.imu.gyro},
                    {"acc_bias", detail::vec3_json(s.imu.acc_bias)},
                    {"gyro_bias", detail::vec3_json(s.imu.gyro_bias)}};
  j["lidar"] = {{"azimuth_steps", s.lidar.azimuth_steps}, {"elevation_steps", s.lidar.elevation_steps},
                {"fov_deg", s.lidar.fov_deg}, {"range_noise", s.lidar.range_noise},
                {"max_range", s.lidar.max_range}, {"translation", detail::vec3_json(s.lidar.translation)}};
  j["perturbation"] = {{"gravity_drift_deg", s.perturbation.gravity_drift_deg},
                       {"cabin_pitch_deg", s.perturbation.cabin_pitch_deg},
                       {"init_misalign_deg", s.perturbation.init_misalign_deg}};
  auto rides = nlohmann::json::array();
  for (const auto& r : s.rides) rides.push_back({{"to_floor", r.to_floor}, {"a_max", r.a_max}, {"v_max", r.v_max}});
  j["rides"] = rides;
  return j;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open scenario " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, path + ": " + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace elio::sim
