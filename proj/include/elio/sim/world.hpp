#pragma once

#include <vector>

#include "elio/sim/geometry.hpp"
#include "elio/sim/timeline.hpp"

namespace elio::sim {

/// Static building: one hall per floor, the landing wall with its door
/// openings, and the shaft enclosure.
inline std::vector<Rect> building_surfaces(const Scenario& s) {
  using L = Layout;
  std::vector<Rect> out;
  const double x0 = L::kHallXMin, x1 = L::kHallXMax, hy = L::kHallHalfY;
  const double dw = L::kDoorHalfWidth;
  for (int f = 0; f < s.floors; ++f) {
    const double z0 = f * s.floor_height;
    const double z1 = z0 + s.floor_height - s.slab;
    out.push_back(box_face({x0, -hy, z0}, {x1, hy, z0}));
    out.push_back(box_face({x0, -hy, z1}, {x1, hy, z1}));
    out.push_back(box_face({x0, -hy, z0}, {x0, hy, z1}));
    out.push_back(box_face({x0, -hy, z0}, {x1, -hy, z1}));
    out.push_back(box_face({x0, hy, z0}, {x1, hy, z1}));
    out.push_back(box_face({x1, -hy, z0}, {x1, -dw, z1}));
    out.push_back(box_face({x1, dw, z0}, {x1, hy, z1}));
    out.push_back(box_face({x1, -dw, z0 + L::kDoorHeight}, {x1, dw, z1}));
    for (const auto& pc : pillar_centres(f)) add_pillar(out, pc.x(), pc.y(), L::kPillarHalf, z0, z1);
  }
  const double bottom = -1.5;
  const double top = s.floors * s.floor_height + 0.5;
  const double sy = L::kShaftHalfY;
  out.push_back(box_face({x1, -sy, bottom}, {L::kShaftXMax, sy, bottom}));
  out.push_back(box_face({x1, -sy, top}, {L::kShaftXMax, sy, top}));
  out.push_back(box_face({L::kShaftXMax, -sy, bottom}, {L::kShaftXMax, sy, top}));
  out.push_back(box_face({x1, -sy, bottom}, {L::kShaftXMax, -sy, top}));
  out.push_back(box_face({x1, sy, bottom}, {L::kShaftXMax, sy, top}));
  // Landing wall between the hall storeys, below the first and above the last.
  out.push_back(box_face({x1, -sy, bottom}, {x1, sy, 0.0}));
  for (int f = 1; f < s.floors; ++f) {
    out.push_back(box_face({x1, -sy, f * s.floor_height - s.slab}, {x1, sy, f * s.floor_height}));
  }
  out.push_back(box_face({x1, -sy, s.floors * s.floor_height - s.slab}, {x1, sy, top}));
  return out;
}

/// Cabin in its own frame: floor centre at the origin, door on the -x face.
inline std::vector<Rect> cabin_surfaces(bool door_closed) {
  using L = Layout;
  constexpr double pad = 1e-6;  // closes rounding cracks along shared edges
  const double hx = L::kCabinHalfX, hy = L::kCabinHalfY, h = L::kCabinHeight;
  const double dw = L::kDoorHalfWidth;
  std::vector<Rect> out;
  out.push_back(box_face({-hx, -hy, 0.0}, {hx, hy, 0.0}, pad));
  out.push_back(box_face({-hx, -hy, h}, {hx, hy, h}, pad));
  out.push_back(box_face({hx, -hy, 0.0}, {hx, hy, h}, pad));
  out.push_back(box_face({-hx, -hy, 0.0}, {hx, -hy, h}, pad));
  out.push_back(box_face({-hx, hy, 0.0}, {hx, hy, h}, pad));
  out.push_back(box_face({-hx, -hy, 0.0}, {-hx, -dw, h}, pad));
  out.push_back(box_face({-hx, dw, 0.0}, {-hx, hy, h}, pad));
  out.push_back(box_face({-hx, -dw, L::kDoorHeight}, {-hx, dw, h}, pad));
  if (door_closed) out.push_back(box_face({-hx, -dw, 0.0}, {-hx, dw, L::kDoorHeight}, pad));
  return out;
}

/// Every surface present at time t.
inline std::vector<Rect> world_surfaces(const Timeline& tl, const std::vector<Rect>& building, double t) {
  std::vector<Rect> out = building;
  const auto& s = tl.scenario();
  const Vec3 base(0.0, 0.0, s.start_floor * s.floor_height);
  const Vec3 offset = tl.at(t).cabin_offset;
  const Mat3 rot = tl.cabin_rotation();
  for (const auto& r : cabin_surfaces(tl.door_closed(t))) out.push_back(transformed(r, rot, base + offset));
  return out;
}

}  // namespace elio::sim
