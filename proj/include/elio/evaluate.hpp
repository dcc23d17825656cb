#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "elio/errors.hpp"
#include "elio/io.hpp"

namespace elio {

struct DoorInterval {
  double close = 0.0;       // ground-truth mode turns non-inertial
  double open = 0.0;        // and back
  double motion_end = 0.0;  // last instant with non-zero transport speed
};

struct RideResult {
  double t = 0.0;    // time of the exit record
  double e_z = 0.0;  // Δz_est − Δz_gt at that record
};

struct Metrics {
  double e_z = 0.0;    // terminal
  double e_ret = 0.0;  // |e_z| at the last ride end (terminal when there is none)
  std::optional<double> rmse_z;
  int rides = 0;
  int entries_detected = 0;
  int exits_detected = 0;
  int false_entries = 0;
  int false_exits = 0;
  std::vector<RideResult> ride_ends;

  std::string entry_ratio() const { return std::to_string(entries_detected) + "/" + std::to_string(rides); }
  std::string exit_ratio() const { return std::to_string(exits_detected) + "/" + std::to_string(rides); }
};

/// Detection ratio as "hits/total".
inline std::string detection_ratio(int detected, int total) {
  return std::to_string(detected) + "/" + std::to_string(total);
}

inline std::vector<DoorInterval> door_intervals(std::span<const GroundTruthRow> gt) {
  std::vector<DoorInterval> out;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const bool closed = gt[i].mode == Mode::NonInertial;
    const bool was = i > 0 && gt[i - 1].mode == Mode::NonInertial;
    if (closed && !was) out.push_back({gt[i].t, gt.back().t, gt[i].t});
    if (!closed && was) out.back().open = gt[i].t;
    if (closed && std::abs(gt[i].elevator_vel) > 1e-9) out.back().motion_end = gt[i].t;
  }
  return out;
}

/// Ground-truth position at time t (linear interpolation, clamped).
inline Vec3 truth_position(std::span<const GroundTruthRow> gt, double t) {
  auto it = std::lower_bound(gt.begin(), gt.end(), t, [](const GroundTruthRow& r, double v) { return r.t < v; });
  if (it == gt.begin()) return gt.front().position;
  if (it == gt.end()) return gt.back().position;
  const auto& b = *it;
  const auto& a = *(it - 1);
  const double w = b.t > a.t ? (t - a.t) / (b.t - a.t) : 1.0;
  return a.position + w * (b.position - a.position);
}

/// Vertical error of every record relative to the ground truth, both measured
/// from their own starting positions.
inline Metrics evaluate(std::span<const TrajectoryRecord> traj, std::span<const GroundTruthRow> gt,
                        double exit_grace = 3.0) {
  if (gt.empty()) throw Error(ErrorKind::MissingReference, "ground truth is empty");
  if (traj.empty()) throw Error(ErrorKind::MissingReference, "trajectory is empty");
  Metrics m;
  const double z0_est = traj.front().position.z();
  const double z0_gt = truth_position(gt, traj.front().t).z();
  auto err = [&](const TrajectoryRecord& r) {
    return (r.position.z() - z0_est) - (truth_position(gt, r.t).z() - z0_gt);
  };
  double sq = 0.0;
  for (const auto& r : traj) {
    const double e = err(r);
    sq += e * e;
    if (r.flags & flag::kExit) m.ride_ends.push_back({r.t, e});
  }
  m.rmse_z = std::sqrt(sq / static_cast<double>(traj.size()));
  m.e_z = err(traj.back());
  m.e_ret = std::abs(m.ride_ends.empty() ? m.e_z : m.ride_ends.back().e_z);

  const auto doors = door_intervals(gt);
  m.rides = static_cast<int>(doors.size());
  std::vector<bool> entry_hit(doors.size(), false), exit_hit(doors.size(), false);
  for (const auto& r : traj) {
    if (r.flags & flag::kEntry) {
      bool ok = false;
      for (std::size_t i = 0; i < doors.size(); ++i) {
        if (!entry_hit[i] && r.t >= doors[i].close && r.t < doors[i].open) ok = entry_hit[i] = true;
        if (ok) break;
      }
      if (!ok) ++m.false_entries;
    }
    if (r.flags & flag::kExit) {
      bool ok = false;
      for (std::size_t i = 0; i < doors.size(); ++i) {
        if (!exit_hit[i] && r.t >= doors[i].motion_end && r.t <= doors[i].open + exit_grace) ok = exit_hit[i] = true;
        if (ok) break;
      }
      if (!ok) ++m.false_exits;
    }
  }
  m.entries_detected = static_cast<int>(std::count(entry_hit.begin(), entry_hit.end(), true));
  m.exits_detected = static_cast<int>(std::count(exit_hit.begin(), exit_hit.end(), true));
  return m;
}

/// Terminal error against a known end height only.
inline Metrics evaluate_against_height(std::span<const TrajectoryRecord> traj, double z_ref) {
  if (traj.empty()) throw Error(ErrorKind::MissingReference, "trajectory is empty");
  Metrics m;
  m.e_z = traj.back().position.z() - z_ref;
  m.e_ret = std::abs(m.e_z);
  return m;
}

inline nlohmann::json to_json(const Metrics& m) {
  nlohmann::json j;
  j["e_z"] = m.e_z;
  j["e_ret"] = m.e_ret;
  if (m.rmse_z) {
    j["rmse_z"] = *m.rmse_z;
    j["entry_detection"] = m.entry_ratio();
    j["exit_detection"] = m.exit_ratio();
    j["false_entries"] = m.false_entries;
    j["false_exits"] = m.false_exits;
    auto rides = nlohmann::json::array();
    for (const auto& r : m.ride_ends) rides.push_back({{"t", r.t}, {"e_z", r.e_z}});
    j["ride_ends"] = rides;
  }
  return j;
}

}  // namespace elio
