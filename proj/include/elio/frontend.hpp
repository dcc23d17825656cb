#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "elio/errors.hpp"
#include "elio/mapping.hpp"
#include "elio/scan_update.hpp"

namespace elio {

/// One representative per occupied voxel: the member nearest the voxel
/// centroid, ties resolved by lowest lexicographic coordinate. Output is
/// ordered by voxel index, so it does not depend on the input order.
inline std::vector<Vec3> voxel_downsample(std::span<const Vec3> points, double size) {
  struct Entry {
    VoxelKey key;
    std::size_t i;
  };
  std::vector<Entry> entries;
  entries.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) entries.push_back({voxel_of(points[i], size), i});
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.key < b.key; });

  auto lex_less = [](const Vec3& a, const Vec3& b) {
    if (a.x() != b.x()) return a.x() < b.x();
    if (a.y() != b.y()) return a.y() < b.y();
    return a.z() < b.z();
  };

  std::vector<Vec3> out;
  for (std::size_t lo = 0; lo < entries.size();) {
    std::size_t hi = lo;
    Vec3 c = Vec3::Zero();
    while (hi < entries.size() && entries[hi].key == entries[lo].key) c += points[entries[hi++].i];
    c /= static_cast<double>(hi - lo);
    const Vec3* best = &points[entries[lo].i];
    double best_d2 = (*best - c).squaredNorm();
    for (std::size_t j = lo + 1; j < hi; ++j) {
      const Vec3& p = points[entries[j].i];
      const double d2 = (p - c).squaredNorm();
      if (d2 < best_d2 || (d2 == best_d2 && lex_less(p, *best))) {
        best = &p;
        best_d2 = d2;
      }
    }
    out.push_back(*best);
    lo = hi;
  }
  return out;
}

struct AdaptiveVoxelState {
  double voxel = 0.2;        // v_t [m]
  double n_target = 2000.0;  // points per scan
  double alpha = 1.2;
  double v_min = 0.05;
  double v_max = 0.8;

  bool valid() const {
    return alpha > 0 && n_target > 0 && v_min > 0 && v_min <= v_max && voxel >= v_min && voxel <= v_max;
  }
};

/// Proportional feedback on the post-downsample point count.
inline AdaptiveVoxelState adapt_voxel(AdaptiveVoxelState s, std::size_t n) {
  const double factor =
      n == 0 ? 0.5 : std::pow(static_cast<double>(n) / s.n_target, 1.0 / s.alpha);
  s.voxel = std::clamp(s.voxel * factor, s.v_min, s.v_max);
  return s;
}

struct FrontendOptions {
  double min_range = 0.5;  // [m]
  double max_range = 100.0;
  bool adapt = true;
  bool undistort = false;
};

/// Body-frame motion used for constant-velocity undistortion.
struct BodyMotion {
  Vec3 angular = Vec3::Zero();  // bias-corrected gyro [rad/s]
  Vec3 linear = Vec3::Zero();   // velocity in the IMU frame [m/s]
};

/// Moves each point to the scan-end pose, assuming constant body motion over
/// the sweep. Offsets are the per-point times relative to the scan end.
inline std::vector<Vec3> undistort(std::span<const Vec3> points, std::span<const double> offsets,
                                   const BodyMotion& motion, const Extrinsics& ext) {
  std::vector<Vec3> out(points.begin(), points.end());
  if (offsets.size() != points.size()) return out;
  const Rotation inv_rot = ext.rotation.conjugate();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double dt = offsets[i];
    if (dt == 0.0) continue;
    const Vec3 q = ext.lidar_to_imu(points[i]);
    const Vec3 q_end = exp_so3(motion.angular * dt) * q + motion.linear * dt;
    out[i] = inv_rot * (q_end - ext.translation);
  }
  return out;
}

struct PreprocessResult {
  std::vector<Vec3> filtered;     // valid points before downsampling
  std::vector<Vec3> downsampled;  // what the estimator consumes
  AdaptiveVoxelState voxel;       // state for the next scan
  double used_voxel = 0.0;
};

inline PreprocessResult preprocess(const Scan& scan, const AdaptiveVoxelState& s,
                                   const FrontendOptions& opts, const BodyMotion& motion = {},
                                   const Extrinsics& ext = {}) {
  PreprocessResult out;
  std::vector<Vec3> pts;
  std::vector<double> offs;
  const bool with_offsets = scan.offsets.size() == scan.points.size();
  pts.reserve(scan.points.size());
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    const Vec3& p = scan.points[i];
    if (!p.allFinite()) continue;
    const double r = p.norm();
    if (r < opts.min_range || r > opts.max_range) continue;
    pts.push_back(p);
    if (with_offsets) offs.push_back(scan.offsets[i]);
  }
  if (pts.empty()) throw Error(ErrorKind::EmptyScan, "no valid points at t=" + std::to_string(scan.t));
  if (opts.undistort && with_offsets) pts = undistort(pts, offs, motion, ext);
  out.filtered = std::move(pts);
  out.used_voxel = s.voxel;
  out.downsampled = voxel_downsample(out.filtered, s.voxel);
  out.voxel = opts.adapt ? adapt_voxel(s, out.downsampled.size()) : s;
  return out;
}

}  // namespace elio
