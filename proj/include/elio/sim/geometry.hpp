#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "elio/manifold.hpp"

namespace elio::sim {

/// Finite planar rectangle: center + two orthonormal in-plane axes.
struct Rect {
  Vec3 center = Vec3::Zero();
  Vec3 u = Vec3::UnitX();
  Vec3 v = Vec3::UnitY();
  double half_u = 0.5;
  double half_v = 0.5;

  Vec3 normal() const { return u.cross(v); }
  double radius() const { return std::hypot(half_u, half_v); }
};

inline constexpr double kMinHit = 1e-9;  // [m]

/// Ray parameter of the intersection with a unit-direction ray, if any.
/// Rays parallel to the plane never hit.
inline std::optional<double> intersect(const Rect& r, const Vec3& origin, const Vec3& dir) {
  const Vec3 n = r.normal();
  const double denom = n.dot(dir);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double t = n.dot(r.center - origin) / denom;
  if (!(t > kMinHit)) return std::nullopt;
  const Vec3 h = origin + t * dir - r.center;
  if (std::abs(h.dot(r.u)) > r.half_u || std::abs(h.dot(r.v)) > r.half_v) return std::nullopt;
  return t;
}

/// Axis-aligned rectangle spanning [lo, hi] with one degenerate axis.
inline Rect box_face(const Vec3& lo, const Vec3& hi, double pad = 0.0) {
  Rect r;
  r.center = 0.5 * (lo + hi);
  const Vec3 ext = (hi - lo).cwiseAbs();
  int flat = 0;
  ext.minCoeff(&flat);
  const int a = (flat + 1) % 3;
  const int b = (flat + 2) % 3;
  r.u = Vec3::Unit(a);
  r.v = Vec3::Unit(b);
  r.half_u = 0.5 * ext(a) + pad;
  r.half_v = 0.5 * ext(b) + pad;
  return r;
}

/// The four vertical faces of an axis-aligned pillar.
inline void add_pillar(std::vector<Rect>& out, double x, double y, double half, double z0, double z1) {
  out.push_back(box_face({x - half, y - half, z0}, {x - half, y + half, z1}));
  out.push_back(box_face({x + half, y - half, z0}, {x + half, y + half, z1}));
  out.push_back(box_face({x - half, y - half, z0}, {x + half, y - half, z1}));
  out.push_back(box_face({x - half, y + half, z0}, {x + half, y + half, z1}));
}

inline Rect transformed(const Rect& r, const Mat3& rot, const Vec3& t) {
  Rect o = r;
  o.center = rot * r.center + t;
  o.u = rot * r.u;
  o.v = rot * r.v;
  return o;
}

/// Nearest hit over a set of surfaces. Surfaces are visited in order of the
/// distance to their bounding sphere so the search can stop early; the result
/// equals the exhaustive minimum.
class RayCaster {
 public:
  RayCaster(std::span<const Rect> surfaces, const Vec3& origin) : surfaces_(surfaces), origin_(origin) {
    order_.reserve(surfaces.size());
    for (std::size_t i = 0; i < surfaces.size(); ++i) {
      const double d = (surfaces[i].center - origin).norm() - surfaces[i].radius();
      order_.push_back({std::max(0.0, d), i});
    }
    std::sort(order_.begin(), order_.end(),
              [](const Bound& a, const Bound& b) { return a.dist < b.dist || (a.dist == b.dist && a.i < b.i); });
  }

  std::optional<double> cast(const Vec3& dir, double max_range) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : order_) {
      if (b.dist >= best) break;
      if (auto t = intersect(surfaces_[b.i], origin_, dir); t && *t < best) best = *t;
    }
    if (best > max_range) return std::nullopt;
    return best;
  }

 private:
  struct Bound {
    double dist;
    std::size_t i;
  };
  std::span<const Rect> surfaces_;
  Vec3 origin_;
  std::vector<Bound> order_;
};

}  // namespace elio::sim
