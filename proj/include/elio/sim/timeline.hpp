#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "elio/errors.hpp"
#include "elio/sim/profile.hpp"
#include "elio/sim/scenario.hpp"
#include "elio/state.hpp"

namespace elio::sim {

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

/// Hall and cabin dimensions shared by the timeline and the world builder.
struct Layout {
  static constexpr double kHallXMin = -12.0;
  static constexpr double kHallXMax = -0.85;  // landing wall plane
  static constexpr double kHallHalfY = 5.0;
  static constexpr double kCabinHalfX = 0.8;
  static constexpr double kCabinHalfY = 0.7;
  static constexpr double kCabinHeight = 2.2;
  static constexpr double kDoorHalfWidth = 0.5;
  static constexpr double kDoorHeight = 2.1;
  static constexpr double kShaftXMax = 1.5;
  static constexpr double kShaftHalfY = 1.5;
  static constexpr double kPillarHalf = 0.2;
  static constexpr double kClearance = 0.3;  // spawn clearance from any wall
};

/// Pillar centres for a given floor; odd floors use a different layout.
inline std::vector<Vec3> pillar_centres(int floor) {
  if (floor % 2 == 0) return {{-8.0, 3.0, 0.0}, {-6.0, -3.5, 0.0}};
  return {{-9.0, -2.0, 0.0}, {-5.5, 3.2, 0.0}};
}

struct PathSegment {
  double t0, t1;
  Vec3 p0, p1;  // horizontal, z ignored
  double yaw0, yaw1;
};

struct Ride {
  int from_floor = 0;
  int to_floor = 1;
  double door_close = 0.0;
  double motion_start = 0.0;
  double motion_end = 0.0;
  double door_open = 0.0;
  TrapezoidProfile profile;  // along the transport axis
};

struct TruthSample {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  Rotation rotation = Rotation::Identity();
  Vec3 velocity = Vec3::Zero();
  Vec3 accel = Vec3::Zero();    // world-frame kinematic acceleration
  Vec3 angular = Vec3::Zero();  // body-frame angular velocity
  Vec3 gravity = Vec3(0, 0, -9.81);
  double elevator_pos = 0.0;  // vertical displacement of the most recent ride
  double elevator_vel = 0.0;
  double elevator_acc = 0.0;
  Mode mode = Mode::Inertial;
  Vec3 cabin_offset = Vec3::Zero();  // cumulative transport displacement
};

/// Scripted robot and elevator motion over the whole scenario.
class Timeline {
 public:
  explicit Timeline(const Scenario& s) : s_(s) {
    validate();
    const double pitch = deg2rad(s.perturbation.cabin_pitch_deg);
    axis_ = Vec3(0.0, std::sin(pitch), std::cos(pitch));
    const Vec3 w = s.hall_waypoint;
    const Vec3 c = Vec3::Zero();
    const auto& tm = s.timing;
    double t = tm.initial_static;
    int floor = s.start_floor;
    for (const auto& spec : s.rides) {
      add_wiggle(t, w, tm.hall_wait);
      t += tm.hall_wait;
      segments_.push_back({t, t + tm.walk, w, c, 0.0, 0.0});
      t += tm.walk;
      Ride r;
      r.from_floor = floor;
      r.to_floor = spec.to_floor;
      r.door_close = t + tm.dwell;
      r.motion_start = r.door_close + tm.start_delay;
      const double travel = (spec.to_floor - floor) * s.floor_height / axis_.z();
      r.profile = trapezoid_profile(travel, spec.a_max, spec.v_max);
      r.motion_end = r.motion_start + r.profile.duration();
      r.door_open = r.motion_end + tm.open_delay;
      const double walk_out = r.motion_end + tm.exit_delay;
      segments_.push_back({walk_out, walk_out + tm.walk, c, w, 0.0, 0.0});
      t = walk_out + tm.walk;
      rides_.push_back(r);
      floor = spec.to_floor;
    }
    end_ = t + tm.tail;
  }

  const Scenario& scenario() const { return s_; }
  const std::vector<Ride>& rides() const { return rides_; }
  double end_time() const { return end_; }
  const Vec3& transport_axis() const { return axis_; }

  /// Times at which some acceleration is discontinuous.
  std::vector<double> breakpoints() const {
    std::vector<double> b;
    for (const auto& r : rides_) {
      b.push_back(r.motion_start);
      b.push_back(r.motion_start + r.profile.t_acc);
      b.push_back(r.motion_start + r.profile.t_acc + r.profile.t_cruise);
      b.push_back(r.motion_end);
    }
    std::sort(b.begin(), b.end());
    return b;
  }

  /// Rotation of the cabin relative to the world (cabin pitch perturbation).
  Mat3 cabin_rotation() const {
    return Eigen::AngleAxisd(-deg2rad(s_.perturbation.cabin_pitch_deg), Vec3::UnitX()).toRotationMatrix();
  }

  /// Rotation of the accelerometer triad against the body frame. Static
  /// initialization then aligns gravity off by this angle.
  Mat3 accel_misalignment() const {
    return Eigen::AngleAxisd(deg2rad(s_.perturbation.init_misalign_deg), Vec3::UnitX()).toRotationMatrix();
  }

  Vec3 true_gravity(double t) const {
    double turns = 0.0;
    for (const auto& r : rides_) {
      const double T = r.motion_end - r.motion_start;
      if (T > 0.0) turns += std::clamp((t - r.motion_start) / T, 0.0, 1.0);
    }
    const double theta = deg2rad(s_.perturbation.gravity_drift_deg) * turns;
    return Eigen::AngleAxisd(theta, Vec3::UnitX()) * Vec3(0.0, 0.0, -s_.gravity);
  }

  bool door_closed(double t) const {
    return std::any_of(rides_.begin(), rides_.end(),
                       [t](const Ride& r) { return t >= r.door_close && t < r.door_open; });
  }

  TruthSample at(double t) const {
    TruthSample x;
    x.t = t;
    // Robot path in the level frame.
    Vec3 p = s_.hall_waypoint;
    double yaw = 0.0, yaw_d = 0.0;
    Vec3 v = Vec3::Zero(), a = Vec3::Zero();
    for (const auto& seg : segments_) {
      if (t < seg.t0) break;
      const double T = seg.t1 - seg.t0;
      const auto k = min_jerk((t - seg.t0) / T);
      const bool inside = t < seg.t1;
      p = seg.p0 + k.s * (seg.p1 - seg.p0);
      yaw = seg.yaw0 + k.s * (seg.yaw1 - seg.yaw0);
      v = inside ? Vec3(k.v / T * (seg.p1 - seg.p0)) : Vec3::Zero();
      a = inside ? Vec3(k.a / (T * T) * (seg.p1 - seg.p0)) : Vec3::Zero();
      yaw_d = inside ? k.v / T * (seg.yaw1 - seg.yaw0) : 0.0;
    }
    p.z() = s_.imu_height + s_.start_floor * s_.floor_height;
    v.z() = 0.0;
    a.z() = 0.0;

    // Elevator transport.
    Vec3 offset = Vec3::Zero();
    for (const auto& r : rides_) {
      if (t < r.door_close) break;
      const auto k = r.profile.at(t - r.motion_start);
      offset += k.s * axis_;
      v += k.v * axis_;
      a += k.a * axis_;
      x.elevator_pos = k.s * axis_.z();
      x.elevator_vel = k.v * axis_.z();
      x.elevator_acc = k.a * axis_.z();
    }
    x.position = p + offset;
    x.velocity = v;
    x.accel = a;
    x.rotation = Rotation(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
    x.angular = Vec3(0.0, 0.0, yaw_d);
    x.gravity = true_gravity(t);
    x.mode = door_closed(t) ? Mode::NonInertial : Mode::Inertial;
    x.cabin_offset = offset;
    return x;
  }

 private:
  void validate() const {
    const auto& s = s_;
    auto fail = [](const std::string& m) { throw Error(ErrorKind::ConfigError, m); };
    if (s.floors < 1) fail("floors must be >= 1");
    if (s.start_floor < 0 || s.start_floor >= s.floors) fail("start_floor out of range");
    if (!(s.floor_height > s.slab + Layout::kCabinHeight) || !(s.slab > 0)) fail("floor_height too small");
    if (!(s.imu_rate > 0) || !(s.lidar_rate > 0) || !(s.gravity > 0)) fail("rates and gravity must be > 0");
    if (!s.perturbation.valid()) fail("negative perturbation angle");
    if (s.perturbation.cabin_pitch_deg >= 10.0) fail("cabin pitch must stay below 10 deg");
    const auto& t = s.timing;
    for (double d : {t.walk, t.dwell, t.start_delay, t.open_delay, t.exit_delay, t.hall_wait}) {
      if (!(d > 0)) fail("timing entries must be > 0");
    }
    if (!(t.initial_static >= 0.5) || !(t.tail >= 0)) fail("initial_static must be >= 0.5 s");
    if (!(t.exit_delay > t.open_delay)) fail("exit_delay must exceed open_delay");
    const double h = s.imu_height + s.lidar.translation.z();
    if (!(s.imu_height > 0) || !(h < s.floor_height - s.slab - Layout::kClearance) || h > Layout::kDoorHeight) {
      fail("sensor height outside the free space");
    }
    const Vec3 w(s.hall_waypoint.x(), s.hall_waypoint.y(), 0.0);
    const double c = Layout::kClearance;
    if (!(w.x() > Layout::kHallXMin + c && w.x() < Layout::kHallXMax - c && std::abs(w.y()) < Layout::kHallHalfY - c)) {
      fail("robot spawn point lies outside the hall");
    }
    for (int f = 0; f < s.floors; ++f) {
      for (const auto& pc : pillar_centres(f)) {
        const double lim = Layout::kPillarHalf + c;
        if (std::abs(w.x() - pc.x()) < lim && std::abs(w.y() - pc.y()) < lim) fail("robot spawn point inside a pillar");
        // The walk to the cabin runs along the segment from the waypoint to the origin.
        const double tau = std::clamp(-pc.dot(w) / w.squaredNorm() + 1.0, 0.0, 1.0);
        const Vec3 q = w * (1.0 - tau);
        if (std::abs(q.x() - pc.x()) < lim && std::abs(q.y() - pc.y()) < lim) fail("walk path crosses a pillar");
      }
    }
    int floor = s.start_floor;
    double offset_y = 0.0;
    for (const auto& r : s.rides) {
      if (r.to_floor < 0 || r.to_floor >= s.floors) fail("ride target floor out of range");
      if (r.to_floor == floor) fail("ride must change floor");
      if (!(r.a_max > 0) || !(r.v_max > 0)) fail("ride a_max and v_max must be > 0");
      offset_y += (r.to_floor - floor) * s.floor_height * std::tan(deg2rad(s.perturbation.cabin_pitch_deg));
      if (std::abs(offset_y) + Layout::kCabinHalfY + 0.2 > Layout::kShaftHalfY) fail("tilted cabin leaves the shaft");
      floor = r.to_floor;
    }
  }

  void add_wiggle(double t, const Vec3& w, double span) {
    if (s_.hall_yaw == 0.0) return;
    const double half = 0.5 * span;
    segments_.push_back({t, t + half, w, w, 0.0, s_.hall_yaw});
    segments_.push_back({t + half, t + span, w, w, s_.hall_yaw, 0.0});
  }

  Scenario s_;
  Vec3 axis_ = Vec3::UnitZ();
  std::vector<PathSegment> segments_;
  std::vector<Ride> rides_;
  double end_ = 0.0;
};

}  // namespace elio::sim
