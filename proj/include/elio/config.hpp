#pragma once

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "elio/errors.hpp"
#include "elio/exit_handler.hpp"
#include "elio/frontend.hpp"
#include "elio/mode_manager.hpp"
#include "elio/scan_update.hpp"
#include "elio/state.hpp"

namespace elio {

struct InitialUncertainty {
  double pos = 1e-3;        // std [m]
  double rot = 1e-3;        // [rad]
  double vel = 1e-2;        // [m/s]
  double acc_bias = 2e-2;   // [m/s^2]
  double gyro_bias = 1e-3;  // [rad/s]
};

struct RunConfig {
  NoiseParams noise;
  UpdateConfig update;  // includes kappa_max and epsilon
  ExitConfig exit;
  EntryDetector::Config entry;
  ExitFsm::Config exit_fsm;
  FrontendOptions frontend;
  double n_target_per_sec = 20000.0;
  double scan_rate = 10.0;  // [Hz]
  double alpha = 1.2;
  double v_min = 0.05;
  double v_max = 0.8;
  double initial_voxel = 0.2;
  double fixed_voxel = 0.2;  // used when adaptation is off
  double map_resolution = 0.1;
  Extrinsics extrinsics{Rotation::Identity(), Vec3(0.05, 0.0, 0.1)};
  int init_sample_count = 100;
  double init_max_spread = 0.1;  // accel-norm spread bound [m/s^2]
  double gravity = 9.81;
  InitialUncertainty initial;
  int max_degenerate_streak = 10;
  std::uint64_t seed = 0;
  bool zupt = true;
  bool elevator_mode = true;

  AdaptiveVoxelState voxel_state() const {
    AdaptiveVoxelState s;
    s.n_target = n_target_per_sec / scan_rate;
    s.alpha = alpha;
    s.v_min = v_min;
    s.v_max = v_max;
    s.voxel = frontend.adapt ? initial_voxel : fixed_voxel;
    return s;
  }

  void validate() const {
    auto fail = [](const std::string& m) { throw Error(ErrorKind::ConfigError, m); };
    if (!noise.valid()) fail("noise parameters must be > 0");
    if (!exit.valid()) fail("zupt noise and reset prior must be > 0");
    if (update.neighbors < 3 || update.max_iterations < 1 || !(update.epsilon > 0) || update.min_matches < 1) {
      fail("invalid update settings");
    }
    if (!(entry.percentile > 0 && entry.percentile < 1)) fail("entry percentile must lie in (0, 1)");
    if (!(entry.depth_threshold > 0) || !(entry.door_time >= 0)) fail("invalid entry detector settings");
    if (!(exit_fsm.window > 0) || !(exit_fsm.quiet_variance < exit_fsm.peak_variance)) fail("invalid exit settings");
    if (!(scan_rate > 0) || !(n_target_per_sec > 0)) fail("scan_rate and n_target_per_sec must be > 0");
    if (frontend.adapt && !voxel_state().valid()) fail("invalid adaptive voxel settings");
    if (!(fixed_voxel > 0) || !(map_resolution > 0)) fail("voxel sizes must be > 0");
    if (init_sample_count < 1) fail("init_sample_count must be >= 1");
    if (!(gravity > 0)) fail("gravity must be > 0");
    if (max_degenerate_streak < 0) fail("max_degenerate_streak must be >= 0");
  }
};

namespace detail {

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  using detail::maybe;
  try {
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      maybe(n, "acc", c.noise.acc);
      maybe(n, "gyro", c.noise.gyro);
      maybe(n, "acc_bias", c.noise.acc_bias);
      maybe(n, "gyro_bias", c.noise.gyro_bias);
      maybe(n, "elevator_acc", c.noise.elevator_acc);
      maybe(n, "lidar", c.noise.lidar);
    }
    if (j.contains("update")) {
      const auto& u = j.at("update");
      maybe(u, "neighbors", c.update.neighbors);
      maybe(u, "plane_threshold", c.update.plane_threshold);
      maybe(u, "max_neighbor_dist", c.update.max_neighbor_dist);
      maybe(u, "residual_gate", c.update.residual_gate);
      maybe(u, "kappa_max", c.update.max_iterations);
      maybe(u, "epsilon", c.update.epsilon);
      maybe(u, "min_matches", c.update.min_matches);
    }
    if (j.contains("zupt")) {
      const auto& z = j.at("zupt");
      if (z.contains("r_v")) c.exit.zupt_noise(0) = z.at("r_v").get<double>();
      if (z.contains("r_a")) c.exit.zupt_noise(1) = z.at("r_a").get<double>();
      if (z.contains("reset_prior")) {
        const auto v = z.at("reset_prior").get<std::vector<double>>();
        if (v.size() != 3) throw Error(ErrorKind::ConfigError, "reset_prior needs 3 values");
        c.exit.reset_prior = Eigen::Vector3d(v[0], v[1], v[2]);
      }
    }
    if (j.contains("entry")) {
      const auto& e = j.at("entry");
      maybe(e, "d_th", c.entry.depth_threshold);
      maybe(e, "door_time", c.entry.door_time);
      maybe(e, "percentile", c.entry.percentile);
    }
    if (j.contains("exit")) {
      const auto& e = j.at("exit");
      maybe(e, "window", c.exit_fsm.window);
      maybe(e, "peak_variance", c.exit_fsm.peak_variance);
      maybe(e, "quiet_variance", c.exit_fsm.quiet_variance);
      maybe(e, "v_stop", c.exit_fsm.stop_speed);
      maybe(e, "t_confirm", c.exit_fsm.confirm_time);
    }
    if (j.contains("frontend")) {
      const auto& f = j.at("frontend");
      maybe(f, "n_target_per_sec", c.n_target_per_sec);
      maybe(f, "scan_rate", c.scan_rate);
      maybe(f, "alpha", c.alpha);
      maybe(f, "v_min", c.v_min);
      maybe(f, "v_max", c.v_max);
      maybe(f, "initial_voxel", c.initial_voxel);
      maybe(f, "fixed_voxel", c.fixed_voxel);
      maybe(f, "undistort", c.frontend.undistort);
      maybe(f, "adapt", c.frontend.adapt);
      maybe(f, "min_range", c.frontend.min_range);
      maybe(f, "max_range", c.frontend.max_range);
    }
    if (j.contains("map")) maybe(j.at("map"), "resolution", c.map_resolution);
    if (j.contains("extrinsics")) {
      const auto& e = j.at("extrinsics");
      if (e.contains("translation")) {
        const auto v = e.at("translation").get<std::vector<double>>();
        if (v.size() != 3) throw Error(ErrorKind::ConfigError, "extrinsic translation needs 3 values");
        c.extrinsics.translation = Vec3(v[0], v[1], v[2]);
      }
      if (e.contains("rotation")) {
        const auto v = e.at("rotation").get<std::vector<double>>();  // qw, qx, qy, qz
        if (v.size() != 4) throw Error(ErrorKind::ConfigError, "extrinsic rotation needs a quaternion");
        c.extrinsics.rotation = Rotation(v[0], v[1], v[2], v[3]).normalized();
      }
    }
    if (j.contains("init")) {
      const auto& i = j.at("init");
      maybe(i, "samples", c.init_sample_count);
      maybe(i, "max_spread", c.init_max_spread);
      maybe(i, "gravity", c.gravity);
    }
    maybe(j, "max_degenerate_streak", c.max_degenerate_streak);
    maybe(j, "seed", c.seed);
    maybe(j, "zupt_enabled", c.zupt);
    maybe(j, "elevator_mode", c.elevator_mode);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, e.what());
  }
  c.validate();
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, path + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace elio
