#pragma once

// Per-location nominal kinematics derived from the toolpath alone, and the
// nine-value feature rows fed to each axis network.
//
// Units: time in seconds, feedrates in mm/min (signed per axis),
// accelerations in mm/min per second.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "cycletime/error.hpp"
#include "cycletime/gcode.hpp"
#include "cycletime/geometry.hpp"

namespace cycletime::features {

using gcode::CutterLocation;
using gcode::Toolpath;

inline constexpr double kDegenerateLength = 1e-9;  // mm
inline constexpr std::size_t kFeatureCount = 9;

/// Column order of FeatureRow::values.
inline constexpr std::array<const char*, kFeatureCount> kFeatureNames = {
    "theta_prev", "theta", "theta_next", "f_prev", "f", "f_next", "a_prev", "a", "a_next"};

using FeatureValues = std::array<double, kFeatureCount>;

struct FeatureRow {
  Axis axis = Axis::X;
  int location_index = 0;
  FeatureValues values{};
};

/// Nominal kinematics for every location, stored 0-based (entry i is
/// location n = i + 1). Entries the toolpath does not define are filled by
/// straight-through continuation at both ends: theta at n = 1 and n = N is
/// -1, the feedrate at n = 1 repeats n = 2, and accelerations at n = 1, 2
/// are zero. `time[0]` is 0.
struct KinematicProfile {
  std::vector<double> time;
  std::vector<Vec3> feedrate;
  std::vector<Vec3> acceleration;
  std::vector<double> theta;
};

inline double segment_length(const Vec3& from, const Vec3& to) { return distance(from, to); }

/// Seconds to traverse prev -> cl at cl's commanded feedrate.
inline double nominal_time(const CutterLocation& prev, const CutterLocation& cl) {
  const double length = segment_length(prev.position, cl.position);
  if (length < kDegenerateLength) {
    throw Error(ErrorKind::DegenerateSegment,
                "zero-length segment ending at location " + std::to_string(cl.index));
  }
  if (!(cl.commanded_feedrate > 0.0)) {
    throw Error(ErrorKind::NonPositiveFeed,
                "location " + std::to_string(cl.index) + " has no positive feedrate");
  }
  return length / cl.commanded_feedrate * 60.0;
}

inline Vec3 nominal_axis_feedrates(const CutterLocation& prev, const CutterLocation& cl) {
  const double t_min = nominal_time(prev, cl) / 60.0;
  return (cl.position - prev.position) / t_min;
}

inline Vec3 nominal_axis_accelerations(const Vec3& feed_prev, const Vec3& feed, double t) {
  return (feed - feed_prev) / t;
}

/// Normalized dot product of the two segment vectors leaving `cl`:
/// -1 is straight through, 0 a right angle, +1 a full reversal.
inline double corner_cosine(const Vec3& prev, const Vec3& cl, const Vec3& next) {
  const Vec3 out = next - cl;
  const Vec3 back = prev - cl;
  const double lo = norm(out), lb = norm(back);
  if (lo < kDegenerateLength || lb < kDegenerateLength) {
    throw Error(ErrorKind::DegenerateSegment, "corner with a zero-length leg");
  }
  return std::clamp(dot(out, back) / (lo * lb), -1.0, 1.0);
}

inline double corner_cosine(const CutterLocation& prev, const CutterLocation& cl,
                            const CutterLocation& next) {
  return corner_cosine(prev.position, cl.position, next.position);
}

inline KinematicProfile kinematic_profile(const Toolpath& tp) {
  const std::size_t count = tp.size();
  KinematicProfile p;
  p.time.assign(count, 0.0);
  p.feedrate.assign(count, Vec3{});
  p.acceleration.assign(count, Vec3{});
  p.theta.assign(count, -1.0);
  if (count < 2) return p;

  const auto& cl = tp.locations;
  for (std::size_t i = 1; i < count; ++i) {
    p.time[i] = nominal_time(cl[i - 1], cl[i]);
    p.feedrate[i] = nominal_axis_feedrates(cl[i - 1], cl[i]);
  }
  p.feedrate[0] = p.feedrate[1];
  for (std::size_t i = 2; i < count; ++i) {
    p.acceleration[i] = nominal_axis_accelerations(p.feedrate[i - 1], p.feedrate[i], p.time[i]);
  }
  for (std::size_t i = 1; i + 1 < count; ++i) {
    p.theta[i] = corner_cosine(cl[i - 1], cl[i], cl[i + 1]);
  }
  return p;
}

/// One row per axis for each interior location n in [2, N-1], ordered by n.
inline PerAxis<std::vector<FeatureRow>> extract_features(const Toolpath& tp) {
  if (tp.size() < 3) {
    throw Error(ErrorKind::ToolpathTooShort,
                "need at least 3 cutter locations, got " + std::to_string(tp.size()));
  }
  const KinematicProfile p = kinematic_profile(tp);
  PerAxis<std::vector<FeatureRow>> out;
  for (Axis axis : kAxes) {
    auto& rows = out[axis];
    rows.reserve(tp.size() - 2);
    for (std::size_t i = 1; i + 1 < tp.size(); ++i) {
      FeatureRow row;
      row.axis = axis;
      row.location_index = static_cast<int>(i) + 1;
      row.values = {p.theta[i - 1],
                    p.theta[i],
                    p.theta[i + 1],
                    p.feedrate[i - 1][axis],
                    p.feedrate[i][axis],
                    p.feedrate[i + 1][axis],
                    p.acceleration[i - 1][axis],
                    p.acceleration[i][axis],
                    p.acceleration[i + 1][axis]};
      rows.push_back(row);
    }
  }
  return out;
}

inline std::string features_csv(const PerAxis<std::vector<FeatureRow>>& rows) {
  std::string out = "axis,n";
  for (const char* name : kFeatureNames) {
    out += ',';
    out += name;
  }
  out += '\n';
  char buf[64];
  for (Axis axis : kAxes) {
    for (const auto& row : rows[axis]) {
      out += axis_letter(axis);
      out += ',' + std::to_string(row.location_index);
      for (double v : row.values) {
        std::snprintf(buf, sizeof buf, ",%.12g", v);
        out += buf;
      }
      out += '\n';
    }
  }
  return out;
}

}  // namespace cycletime::features
