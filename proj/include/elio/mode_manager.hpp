#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "elio/manifold.hpp"

namespace elio {

/// Nearest-rank percentile of the horizontal distance of body-frame points.
/// Returns nothing when fewer than `min_points` points are available.
inline std::optional<double> robust_max_depth(std::span<const Vec3> points, double percentile = 0.94,
                                              std::size_t min_points = 50) {
  std::vector<double> d;
  d.reserve(points.size());
  for (const auto& p : points) {
    if (p.allFinite()) d.push_back(std::hypot(p.x(), p.y()));
  }
  if (d.size() < min_points || d.empty()) return std::nullopt;
  const double exact = percentile * static_cast<double>(d.size());
  auto rank = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, d.size());
  auto nth = d.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(d.begin(), nth, d.end());
  return *nth;
}

/// Raises Flag_Entry once the robust depth stays below the cabin threshold for
/// the whole door-confirmation interval.
class EntryDetector {
 public:
  struct Config {
    double depth_threshold = 3.0;  // d_th [m]
    double door_time = 2.0;        // [s]
    double percentile = 0.94;
  };

  EntryDetector() = default;
  explicit EntryDetector(Config cfg) : cfg_(cfg) {}

  const Config& config() const { return cfg_; }
  std::optional<double> below_since() const { return below_since_; }

  bool update(double depth, double t) {
    if (!(depth < cfg_.depth_threshold)) {
      below_since_.reset();
      return false;
    }
    if (!below_since_) below_since_ = t;
    if (t - *below_since_ >= cfg_.door_time - 1e-9) {
      below_since_.reset();
      return true;
    }
    return false;
  }

  void reset() { below_since_.reset(); }

 private:
  Config cfg_;
  std::optional<double> below_since_;
};

/// Tracks the accelerate / cruise / decelerate pattern of the estimated
/// elevator velocity and raises Flag_Exit once the cabin has come to rest.
class ExitFsm {
 public:
  enum class Phase { Idle, Peak1, Cruise, Peak2, ConfirmStop };

  struct Config {
    double window = 1.0;           // sliding window span [s]
    double peak_variance = 0.01;   // [m^2/s^2]
    double quiet_variance = 1e-3;  // [m^2/s^2]
    double stop_speed = 0.05;      // [m/s]
    double confirm_time = 0.5;     // [s]
  };

  ExitFsm() = default;
  explicit ExitFsm(Config cfg) : cfg_(cfg) {}

  const Config& config() const { return cfg_; }
  Phase phase() const { return phase_; }
  double variance() const { return variance_; }
  double mean() const { return mean_; }

  bool update(double v, double t) {
    window_.push_back({t, v});
    while (!window_.empty() && window_.front().t <= t - cfg_.window + 1e-9) window_.pop_front();
    const double n = static_cast<double>(window_.size());
    mean_ = 0.0;
    for (const auto& s : window_) mean_ += s.v;
    mean_ /= n;
    variance_ = 0.0;
    for (const auto& s : window_) variance_ += (s.v - mean_) * (s.v - mean_);
    variance_ /= n;

    const bool peak = variance_ > cfg_.peak_variance;
    const bool quiet = variance_ < cfg_.quiet_variance;
    const bool stopped = quiet && std::abs(mean_) < cfg_.stop_speed;
    switch (phase_) {
      case Phase::Idle:
        if (peak) phase_ = Phase::Peak1;
        break;
      case Phase::Peak1:
        // A cruise shorter than the window merges both peaks into one.
        if (stopped) {
          phase_ = Phase::ConfirmStop;
          confirm_since_ = t;
        } else if (quiet) {
          phase_ = Phase::Cruise;
        }
        break;
      case Phase::Cruise:
        if (peak) phase_ = Phase::Peak2;
        break;
      case Phase::Peak2:
        if (stopped) {
          phase_ = Phase::ConfirmStop;
          confirm_since_ = t;
        }
        break;
      case Phase::ConfirmStop:
        if (!stopped) {
          phase_ = Phase::Peak2;
        } else if (t - confirm_since_ >= cfg_.confirm_time - 1e-9) {
          reset();
          return true;
        }
        break;
    }
    return false;
  }

  void reset() {
    window_.clear();
    phase_ = Phase::Idle;
    variance_ = 0.0;
    mean_ = 0.0;
  }

 private:
  struct Sample {
    double t;
    double v;
  };

  Config cfg_;
  std::deque<Sample> window_;
  Phase phase_ = Phase::Idle;
  double confirm_since_ = 0.0;
  double variance_ = 0.0;
  double mean_ = 0.0;
};

enum class Trigger { Entry, Exit };

/// Manual Flag_Entry / Flag_Exit injection, drained at scan boundaries.
class TriggerQueue {
 public:
  struct Item {
    double t;
    Trigger trigger;
  };

  void push(Item item) {
    std::lock_guard lock(mutex_);
    auto it = std::upper_bound(items_.begin(), items_.end(), item.t,
                               [](double t, const Item& i) { return t < i.t; });
    items_.insert(it, item);
  }

  /// Removes and returns every trigger with time <= t.
  std::vector<Item> drain(double t) {
    std::lock_guard lock(mutex_);
    std::vector<Item> out;
    while (!items_.empty() && items_.front().t <= t) {
      out.push_back(items_.front());
      items_.pop_front();
    }
    return out;
  }

 private:
  std::mutex mutex_;
  std::deque<Item> items_;
};

}  // namespace elio
