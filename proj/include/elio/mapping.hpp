#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "elio/kd_tree.hpp"
#include "elio/state.hpp"

namespace elio {

struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
  auto operator<=>(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 73856093ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 19349669ULL;
    h ^= static_cast<std::uint64_t>(k.z) * 83492791ULL;
    return static_cast<std::size_t>(h);
  }
};

inline VoxelKey voxel_of(const Vec3& p, double size) {
  return {static_cast<std::int64_t>(std::floor(p.x() / size)),
          static_cast<std::int64_t>(std::floor(p.y() / size)),
          static_cast<std::int64_t>(std::floor(p.z() / size))};
}

/// Point in the elevator-local frame (world frame outside of rides).
inline Vec3 project_to_local(const FilterState& x, const Extrinsics& ext, const Vec3& p_lidar) {
  return x.rotation * ext.lidar_to_imu(p_lidar) + x.position;
}

/// World-frame point, lifted by the elevator displacement.
inline Vec3 project_to_world(const FilterState& x, const Extrinsics& ext, const Vec3& p_lidar) {
  return project_to_local(x, ext, p_lidar) + x.elevator_pos * Vec3::UnitZ();
}

/// Map index plus a coarse occupancy grid: at most one map point is kept per
/// `resolution`-sized voxel.
class PointMap {
 public:
  explicit PointMap(double resolution = 0.1) : resolution_(resolution) {}

  std::size_t insert(std::span<const Vec3> points) {
    std::size_t added = 0;
    for (const auto& p : points) {
      if (!p.allFinite()) continue;
      if (!occupied_.insert(voxel_of(p, resolution_)).second) continue;
      added += tree_.insert(p) ? 1 : 0;
    }
    return added;
  }

  const KdTree& index() const { return tree_; }
  std::vector<Vec3> points() const { return tree_.points(); }
  std::size_t size() const { return tree_.size(); }
  bool empty() const { return tree_.empty(); }

  void clear() {
    tree_ = KdTree{};
    occupied_.clear();
  }

 private:
  double resolution_;
  KdTree tree_;
  std::unordered_set<VoxelKey, VoxelKeyHash> occupied_;
};

/// ASCII export, one `x y z` per line.
inline void export_points(const std::string& path, std::span<const Vec3> points) {
  std::ofstream out(path);
  char buf[96];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof(buf), "%.6f %.6f %.6f\n", p.x(), p.y(), p.z());
    out << buf;
  }
}

}  // namespace elio
