#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "elio/config.hpp"
#include "elio/exit_handler.hpp"
#include "elio/frontend.hpp"
#include "elio/io.hpp"
#include "elio/mapping.hpp"
#include "elio/mode_manager.hpp"
#include "elio/propagation.hpp"
#include "elio/scan_update.hpp"

namespace elio {

/// Reorders sensor events by timestamp, IMU before scan on equal stamps and
/// arrival order otherwise.
class SequenceBuffer {
 public:
  void push(SensorEvent e) {
    const double t = event_time(e);
    newest_ = std::max(newest_, t);
    heap_.push({t, is_scan(e), counter_++, std::move(e)});
  }

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

  /// Pops the earliest event if it is at least `horizon` older than the newest
  /// pushed one (or unconditionally when `drain` is set).
  std::optional<SensorEvent> pop(double horizon = 0.0, bool drain = true) {
    if (heap_.empty()) return std::nullopt;
    if (!drain && heap_.top().t > newest_ - horizon) return std::nullopt;
    SensorEvent e = std::move(const_cast<Item&>(heap_.top()).event);
    heap_.pop();
    return e;
  }

 private:
  struct Item {
    double t;
    bool scan;
    std::size_t seq;
    SensorEvent event;
  };
  struct Later {
    bool operator()(const Item& a, const Item& b) const {
      if (a.t != b.t) return a.t > b.t;
      if (a.scan != b.scan) return a.scan;
      return a.seq > b.seq;
    }
  };
  std::priority_queue<Item, std::vector<Item>, Later> heap_;
  std::size_t counter_ = 0;
  double newest_ = -1e300;
};

/// Attitude from the averaged accelerometer, gyro bias from the averaged gyro.
inline FilterState static_init(std::span<const ImuSample> samples, std::size_t required = 100,
                               double gravity = 9.81, double max_spread = 0.1) {
  if (samples.size() < required || samples.empty()) {
    throw Error(ErrorKind::NotStatic, "need " + std::to_string(required) + " IMU samples, got " +
                                          std::to_string(samples.size()));
  }
  Vec3 acc = Vec3::Zero(), gyro = Vec3::Zero();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : samples) {
    acc += s.acc;
    gyro += s.gyro;
    lo = std::min(lo, s.acc.norm());
    hi = std::max(hi, s.acc.norm());
  }
  if (hi - lo >= max_spread) {
    throw Error(ErrorKind::NotStatic, "accelerometer norm spread " + std::to_string(hi - lo) + " m/s^2");
  }
  const double n = static_cast<double>(samples.size());
  acc /= n;
  gyro /= n;
  FilterState x = default_state(gravity);
  x.rotation = rotation_between(-acc, x.gravity);
  x.gyro_bias = gyro;
  return x;
}

struct RunStats {
  std::size_t imu = 0;
  std::size_t scans = 0;
  std::size_t dropped_scans = 0;  // before initialization
  std::size_t propagations = 0;
  std::size_t updates = 0;
  std::size_t degenerate = 0;
  std::size_t entries = 0;
  std::size_t exits = 0;
};

/// Scan-level diagnostics for the most recent record.
struct ScanDiagnostics {
  std::size_t raw = 0;
  std::size_t filtered = 0;
  std::size_t downsampled = 0;
  double voxel = 0.0;
  std::optional<double> depth;
  UpdateReport update;
};

/// Single-threaded estimator: a fold over time-ordered sensor events.
class Estimator {
 public:
  using RecordSink = std::function<void(const TrajectoryRecord&)>;
  using CovarianceHook = std::function<void(const Covariance&)>;

  explicit Estimator(RunConfig cfg, RecordSink sink = {})
      : cfg_(std::move(cfg)),
        sink_(std::move(sink)),
        voxel_(cfg_.voxel_state()),
        global_(cfg_.map_resolution),
        cabin_(cfg_.map_resolution),
        entry_(cfg_.entry),
        exit_fsm_(cfg_.exit_fsm) {
    cfg_.validate();
  }

  void set_covariance_hook(CovarianceHook hook) { hook_ = std::move(hook); }
  TriggerQueue& triggers() { return triggers_; }

  bool initialized() const { return initialized_; }
  const FilterState& state() const { return x_; }
  const Covariance& covariance() const { return p_; }
  const RunStats& stats() const { return stats_; }
  const ScanDiagnostics& last_scan() const { return diag_; }
  const AdaptiveVoxelState& voxel() const { return voxel_; }
  const PointMap& global_map() const { return global_; }
  double time() const { return t_; }

  void process(const SensorEvent& e) {
    if (const auto* u = std::get_if<ImuSample>(&e)) {
      on_imu(*u);
    } else {
      on_scan(std::get<Scan>(e));
    }
  }

  void on_imu(const ImuSample& u) {
    ++stats_.imu;
    if (!initialized_) {
      if (!init_.empty() && u.t < init_.back().t) throw Error(ErrorKind::NonMonotonicTime, "IMU time went back");
      init_.push_back(u);
      if (init_.size() >= static_cast<std::size_t>(cfg_.init_sample_count)) initialize();
      return;
    }
    advance_to(u.t);
    last_imu_ = u;
  }

  void on_scan(const Scan& scan) {
    ++stats_.scans;
    if (!initialized_) {
      ++stats_.dropped_scans;
      return;
    }
    advance_to(scan.t);
    unsigned flags = 0;
    diag_ = {};
    diag_.raw = scan.points.size();

    std::optional<PreprocessResult> pre;
    try {
      const Vec3 w = last_imu_.gyro - x_.gyro_bias;
      pre = preprocess(scan, voxel_, cfg_.frontend, {w, x_.rotation.conjugate() * x_.velocity}, cfg_.extrinsics);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::EmptyScan) throw;
      flags |= flag::kEmpty;
    }

    if (pre) {
      diag_.filtered = pre->filtered.size();
      diag_.downsampled = pre->downsampled.size();
      diag_.voxel = pre->used_voxel;
      voxel_ = pre->voxel;
      PointMap& map = active_map();
      if (map.size() >= static_cast<std::size_t>(cfg_.update.neighbors)) {
        auto res = ieskf_update(x_, p_, pre->downsampled, map.index(), cfg_.extrinsics, cfg_.noise, cfg_.update);
        diag_.update = res.report;
        if (res.report.degenerate) {
          flags |= flag::kDegenerate;
          ++stats_.degenerate;
          ++degenerate_streak_;
        } else {
          degenerate_streak_ = 0;
          x_ = res.state;
          set_covariance(res.covariance);
          ++stats_.updates;
        }
      }
      insert_scan(map, pre->downsampled);
      flags |= check_modes(*pre);
    }
    flags |= drain_triggers(scan.t);
    if ((flags & flag::kEntry) && x_.mode == Mode::Inertial && cfg_.elevator_mode && pre) {
      enter_elevator(pre->downsampled);
    }
    if ((flags & flag::kExit) && x_.mode == Mode::NonInertial) {
      leave_elevator(pre ? std::span<const Vec3>(pre->downsampled) : std::span<const Vec3>{});
    }
    if (flags & flag::kEntry) ++stats_.entries;
    if (flags & flag::kExit) ++stats_.exits;
    emit(scan.t, flags);
    if (degenerate_streak_ > cfg_.max_degenerate_streak) {
      throw Error(ErrorKind::DegenerateStreak,
                  std::to_string(degenerate_streak_) + " consecutive degenerate updates at t=" + std::to_string(scan.t));
    }
  }

 private:
  void initialize() {
    x_ = static_init(init_, static_cast<std::size_t>(cfg_.init_sample_count), cfg_.gravity, cfg_.init_max_spread);
    Covariance p = Covariance::Zero();
    const auto& u = cfg_.initial;
    auto set = [&](int i, int n, double sd) { p.block(i, i, n, n) = Mat3::Identity().topLeftCorner(n, n) * sd * sd; };
    set(idx::kPos, 3, u.pos);
    set(idx::kRot, 3, u.rot);
    set(idx::kVel, 3, u.vel);
    set(idx::kAccBias, 3, u.acc_bias);
    set(idx::kGyroBias, 3, u.gyro_bias);
    for (int i = 0; i < 3; ++i) p(idx::kElevatorPos + i, idx::kElevatorPos + i) = cfg_.exit.reset_prior(i);
    set_covariance(p);
    t_ = init_.back().t;
    last_imu_ = init_.back();
    init_.clear();
    initialized_ = true;
  }

  void advance_to(double t) {
    if (t < t_) {
      throw Error(ErrorKind::NonMonotonicTime, "event at " + std::to_string(t) + " s after " + std::to_string(t_));
    }
    const double dt = t - t_;
    if (dt == 0.0) return;
    const auto m = build_transition(x_, last_imu_, dt, cfg_.noise);
    x_ = propagate_nominal(x_, last_imu_, dt);
    set_covariance(propagate_covariance(p_, m));
    t_ = t;
    ++stats_.propagations;
  }

  void set_covariance(const Covariance& p) {
    p_ = p;
    if (hook_) hook_(p_);
  }

  PointMap& active_map() { return x_.mode == Mode::NonInertial ? cabin_ : global_; }

  void insert_scan(PointMap& map, std::span<const Vec3> pts) {
    std::vector<Vec3> local;
    local.reserve(pts.size());
    for (const auto& p : pts) local.push_back(project_to_local(x_, cfg_.extrinsics, p));
    map.insert(local);
  }

  unsigned check_modes(const PreprocessResult& pre) {
    unsigned flags = 0;
    if (x_.mode == Mode::Inertial) {
      std::vector<Vec3> body;
      body.reserve(pre.filtered.size());
      for (const auto& p : pre.filtered) body.push_back(cfg_.extrinsics.lidar_to_imu(p));
      diag_.depth = robust_max_depth(body, cfg_.entry.percentile);
      if (diag_.depth && entry_.update(*diag_.depth, t_)) flags |= flag::kEntry;
    } else if (exit_fsm_.update(x_.elevator_vel, t_)) {
      flags |= flag::kExit;
    }
    return flags;
  }

  unsigned drain_triggers(double t) {
    unsigned flags = 0;
    for (const auto& item : triggers_.drain(t)) {
      if (item.trigger == Trigger::Entry && x_.mode == Mode::Inertial) flags |= flag::kEntry | flag::kManual;
      if (item.trigger == Trigger::Exit && x_.mode == Mode::NonInertial) flags |= flag::kExit | flag::kManual;
    }
    return flags;
  }

  void enter_elevator(std::span<const Vec3> pts) {
    x_.mode = Mode::NonInertial;
    x_.elevator_pos = x_.elevator_vel = x_.elevator_acc = 0.0;
    set_covariance(reset_covariance(p_, cfg_.exit));
    cabin_.clear();
    seed_cabin(pts);
    entry_.reset();
    exit_fsm_.reset();
  }

  // The cabin map starts from the global-map points inside the bounding box
  // of the entry scan, which at that moment is the closed cabin, plus the scan
  // itself.
  void seed_cabin(std::span<const Vec3> pts) {
    if (pts.empty()) return;
    std::vector<Vec3> local;
    local.reserve(pts.size());
    for (const auto& p : pts) local.push_back(project_to_local(x_, cfg_.extrinsics, p));
    Vec3 lo = local.front(), hi = lo;
    for (const auto& p : local) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const Vec3 margin = Vec3::Constant(kCabinSeedMargin);
    lo -= margin;
    hi += margin;
    std::vector<Vec3> inside;
    for (const auto& p : global_.points()) {
      if ((p.array() >= lo.array()).all() && (p.array() <= hi.array()).all()) inside.push_back(p);
    }
    cabin_.insert(inside);
    cabin_.insert(local);
  }

  // The exit scan seeds the global map at the new floor so the next update
  // does not lock onto the structure of the floor left behind.
  void leave_elevator(std::span<const Vec3> pts) {
    if (cfg_.zupt) {
      const auto z = zero_state_update(x_, p_, cfg_.exit);
      x_ = reanchor(z.state);
      set_covariance(z.covariance);
      set_covariance(reset_covariance(p_, cfg_.exit));
    } else {
      // Exit handling disabled: back to inertial propagation with the
      // transport states frozen where they are.
      x_.mode = Mode::Inertial;
    }
    cabin_.clear();
    insert_scan(global_, pts);
    entry_.reset();
    exit_fsm_.reset();
  }

  void emit(double t, unsigned flags) {
    if (!sink_) return;
    TrajectoryRecord r;
    r.t = t;
    r.position = compose_global_position(x_);
    r.rotation = x_.rotation;
    r.velocity = x_.velocity;
    r.elevator_pos = x_.elevator_pos;
    r.elevator_vel = x_.elevator_vel;
    r.elevator_acc = x_.elevator_acc;
    r.mode = x_.mode;
    r.flags = flags;
    sink_(r);
  }

  static constexpr double kCabinSeedMargin = 0.1;  // [m]

  RunConfig cfg_;
  RecordSink sink_;
  CovarianceHook hook_;
  TriggerQueue triggers_;
  AdaptiveVoxelState voxel_;
  PointMap global_;
  PointMap cabin_;
  EntryDetector entry_;
  ExitFsm exit_fsm_;
  std::vector<ImuSample> init_;
  bool initialized_ = false;
  FilterState x_;
  Covariance p_ = Covariance::Zero();
  ImuSample last_imu_;
  double t_ = 0.0;
  int degenerate_streak_ = 0;
  RunStats stats_;
  ScanDiagnostics diag_;
};

struct RunOutcome {
  RunStats stats;
  bool aborted = false;
  std::string abort_reason;
  double seconds = 0.0;
};

/// Replays a JSON-lines sequence through the estimator. Run-time aborts
/// (DataGap, NonMonotonicTime, DegenerateStreak) are reported, not thrown;
/// records emitted before the abort have already reached the sink.
inline RunOutcome run_sequence(const std::string& path, const RunConfig& cfg, Estimator::RecordSink sink,
                               std::span<const TriggerQueue::Item> manual = {}, double reorder_window = 0.1) {
  const auto start = std::chrono::steady_clock::now();
  Estimator est(cfg, std::move(sink));
  for (const auto& item : manual) est.triggers().push(item);
  SequenceBuffer buffer;
  RunOutcome out;
  try {
    read_sequence(path, [&](SensorEvent&& e) {
      buffer.push(std::move(e));
      while (auto ev = buffer.pop(reorder_window, false)) est.process(*ev);
    });
    while (auto ev = buffer.pop()) est.process(*ev);
  } catch (const Error& e) {
    const auto k = e.kind();
    if (k != ErrorKind::DataGap && k != ErrorKind::NonMonotonicTime && k != ErrorKind::DegenerateStreak &&
        k != ErrorKind::NotStatic) {
      throw;
    }
    out.aborted = true;
    out.abort_reason = e.what();
  }
  out.stats = est.stats();
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace elio
