#pragma once

// Generator for pocket-roughing NC programs: one rapid approach, a plunge,
// then concentric offset loops of a rectangle, rounded rectangle, circle or
// regular polygon, linearized into short cutter-location segments, and a
// rapid retract.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "cycletime/geometry.hpp"

namespace cycletime::pockets {

enum class Shape { Rectangle, RoundedRectangle, Circle, Polygon };

struct PocketSpec {
  std::string name;
  Shape shape = Shape::Rectangle;
  double center_x = 0.0;
  double center_y = 0.0;
  double width = 60.0;          // rectangle extents, or circumscribed diameter
  double height = 40.0;
  double corner_radius = 0.0;   // rounded rectangle only
  int sides = 8;                // polygon only
  double feed = 3000.0;         // mm/min
  double plunge_feed = 3000.0;
  double depth = 5.0;
  double stepover = 5.0;
  double line_segment = 4.0;    // max chord on straight edges, mm
  double arc_segment = 1.5;     // max chord on arcs, mm
  Vec3 approach_from{0.0, 0.0, 25.0};  // offset from the first cut point
  double clearance = 2.0;
};

namespace detail {

using Polyline = std::vector<Vec3>;

inline void append_line(Polyline& out, const Vec3& to, double max_chord) {
  const Vec3 from = out.back();
  const double len = distance(from, to);
  const int pieces = std::max(1, static_cast<int>(std::ceil(len / max_chord - 1e-9)));
  for (int i = 1; i <= pieces; ++i) out.push_back(from + (to - from) * (static_cast<double>(i) / pieces));
}

inline void append_arc(Polyline& out, const Vec3& center, double radius, double a0, double a1,
                       double max_chord) {
  const double sweep = a1 - a0;
  const double len = std::abs(sweep) * radius;
  const int pieces = std::max(1, static_cast<int>(std::ceil(len / max_chord - 1e-9)));
  for (int i = 1; i <= pieces; ++i) {
    const double a = a0 + sweep * (static_cast<double>(i) / pieces);
    out.push_back({center.x + radius * std::cos(a), center.y + radius * std::sin(a), center.z});
  }
}

/// Closed counter-clockwise loop that starts and ends at the midpoint of
/// its bottom edge, so consecutive loops join with a short +Y stepover.
inline Polyline loop(const PocketSpec& p, double offset, double z) {
  const double pi = std::numbers::pi;
  Polyline pts;
  const Vec3 c{p.center_x, p.center_y, z};
  switch (p.shape) {
    case Shape::Rectangle:
    case Shape::RoundedRectangle: {
      const double hw = p.width / 2 - offset;
      const double hh = p.height / 2 - offset;
      const double r = p.shape == Shape::RoundedRectangle
                           ? std::clamp(p.corner_radius - offset, 0.0, std::min(hw, hh))
                           : 0.0;
      pts.push_back({c.x, c.y - hh, z});
      append_line(pts, {c.x + hw - r, c.y - hh, z}, p.line_segment);
      if (r > 0) append_arc(pts, {c.x + hw - r, c.y - hh + r, z}, r, -pi / 2, 0, p.arc_segment);
      append_line(pts, {c.x + hw, c.y + hh - r, z}, p.line_segment);
      if (r > 0) append_arc(pts, {c.x + hw - r, c.y + hh - r, z}, r, 0, pi / 2, p.arc_segment);
      append_line(pts, {c.x - hw + r, c.y + hh, z}, p.line_segment);
      if (r > 0) append_arc(pts, {c.x - hw + r, c.y + hh - r, z}, r, pi / 2, pi, p.arc_segment);
      append_line(pts, {c.x - hw, c.y - hh + r, z}, p.line_segment);
      if (r > 0) append_arc(pts, {c.x - hw + r, c.y - hh + r, z}, r, pi, 3 * pi / 2, p.arc_segment);
      append_line(pts, {c.x, c.y - hh, z}, p.line_segment);
      break;
    }
    case Shape::Circle: {
      const double r = p.width / 2 - offset;
      pts.push_back({c.x, c.y - r, z});
      append_arc(pts, c, r, -pi / 2, 3 * pi / 2, p.arc_segment);
      break;
    }
    case Shape::Polygon: {
      // Flat bottom edge; `width` is the circumscribed diameter of loop 0.
      const double apothem = p.width / 2 * std::cos(pi / p.sides) - offset;
      const double r = apothem / std::cos(pi / p.sides);
      pts.push_back({c.x, c.y - apothem, z});
      for (int k = 0; k < p.sides; ++k) {
        const double a = -pi / 2 + pi / p.sides + 2 * pi * k / p.sides;
        append_line(pts, {c.x + r * std::cos(a), c.y + r * std::sin(a), z}, p.line_segment);
      }
      append_line(pts, {c.x, c.y - apothem, z}, p.line_segment);
      break;
    }
  }
  return pts;
}

inline double loop_extent(const PocketSpec& p, double offset) {
  switch (p.shape) {
    case Shape::Rectangle:
    case Shape::RoundedRectangle: return std::min(p.width, p.height) / 2 - offset;
    case Shape::Circle: return p.width / 2 - offset;
    case Shape::Polygon: return p.width / 2 * std::cos(std::numbers::pi / p.sides) - offset;
  }
  return 0.0;
}

inline void emit(std::string& out, const char* motion, const Vec3& to, const Vec3* from,
                 const double* feed) {
  char buf[160];
  std::string words = motion;
  const auto add = [&](char axis, double v, double prev, bool force) {
    if (force || std::abs(v - prev) > 5e-5) {
      std::snprintf(buf, sizeof buf, " %c%.4f", axis, v);
      words += buf;
    }
  };
  const bool force = from == nullptr;
  add('X', to.x, force ? 0 : from->x, force);
  add('Y', to.y, force ? 0 : from->y, force);
  add('Z', to.z, force ? 0 : from->z, force);
  if (feed) {
    std::snprintf(buf, sizeof buf, " F%.0f", *feed);
    words += buf;
  }
  out += words;
  out += '\n';
}

}  // namespace detail

/// NC program text for one pocket. Only changed axis words are written after
/// the first block, so the program relies on modal inheritance.
inline std::string pocket_program(const PocketSpec& p) {
  std::string out = "(" + p.name + ")\nG21 G90 G17\n";
  const double z = -p.depth;
  std::vector<detail::Polyline> loops;
  for (double off = 0.0; detail::loop_extent(p, off) > p.stepover * 0.5; off += p.stepover) {
    loops.push_back(detail::loop(p, off, z));
  }
  const Vec3 first = loops.front().front();
  const Vec3 entry{first.x, first.y, p.clearance};
  const Vec3 start = entry + p.approach_from;

  detail::emit(out, "G0", start, nullptr, nullptr);
  detail::emit(out, "G0", entry, &start, nullptr);
  detail::emit(out, "G1", first, &entry, &p.plunge_feed);
  Vec3 at = first;
  bool feed_set = p.plunge_feed == p.feed;
  for (const auto& l : loops) {
    for (const Vec3& pt : l) {
      if (distance(pt, at) < 1e-4) continue;
      detail::emit(out, "G1", pt, &at, feed_set ? nullptr : &p.feed);
      feed_set = true;
      at = pt;
    }
  }
  detail::emit(out, "G0", Vec3{at.x, at.y, p.clearance + p.approach_from.z}, &at, nullptr);
  out += "M30\n";
  return out;
}

/// Eight pockets with mixed straight runs, sharp corners, short-segment
/// curves and one rapid approach each; feeds span 3000-4000 mm/min.
inline std::vector<PocketSpec> standard_suite() {
  std::vector<PocketSpec> s(8);
  s[0] = {"pocket1", Shape::Rectangle, 0, 0, 140, 90, 0, 0, 3000, 3000, 5, 5, 4, 1.5, {40, 0, 25}};
  s[1] = {"pocket2", Shape::Rectangle, 240, 0, 80, 60, 0, 0, 3500, 3000, 5, 4, 4, 1.5, {0, 35, 25}};
  s[2] = {"pocket3", Shape::RoundedRectangle, 0, 180, 100, 80, 16, 0, 3200, 3000, 5, 5, 4, 1.5, {35, 10, 25}};
  s[3] = {"pocket4", Shape::RoundedRectangle, 240, 180, 160, 100, 20, 0, 3600, 3000, 5, 5, 4, 1.5, {30, 30, 25}};
  s[4] = {"pocket5", Shape::Circle, 480, 0, 120, 120, 0, 0, 4000, 3000, 5, 5, 4, 1.5, {-40, 0, 25}};
  s[5] = {"pocket6", Shape::RoundedRectangle, 480, 180, 90, 90, 24, 0, 3800, 3000, 5, 4.5, 4, 1.5, {-30, 20, 25}};
  s[6] = {"pocket7", Shape::Polygon, 0, 360, 120, 120, 0, 6, 3400, 3000, 5, 5, 4, 1.5, {-35, -10, 25}};
  s[7] = {"pocket8", Shape::Polygon, 240, 360, 140, 140, 0, 8, 4000, 3000, 5, 5, 4, 1.5, {-40, 15, 25}};
  return s;
}

}  // namespace cycletime::pockets
