#pragma once

// Simulator property checks shared by the unit tests and the acceptance
// runner. Each returns the number of violations found on one toolpath.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cycletime/features.hpp"
#include "cycletime/predictor.hpp"
#include "cycletime/simulator.hpp"

namespace cycletime::physics {

struct Violations {
  std::size_t feed_ceiling = 0;
  std::size_t axis_ceiling = 0;
  std::size_t continuity = 0;
  std::size_t reversal = 0;
  std::size_t acceleration = 0;
  std::size_t cam_bound = 0;

  std::size_t total() const {
    return feed_ceiling + axis_ceiling + continuity + reversal + acceleration + cam_bound;
  }
};

inline Violations check(const gcode::Toolpath& tp, const sim::MachineLimits& limits) {
  Violations v;
  const auto traj = sim::plan_profile(tp, limits);
  const auto& segs = traj.segments;

  for (const auto& s : traj.dense) {
    const auto& seg = segs[s.segment];
    if (norm(s.velocity) > seg.commanded_speed + 1e-6) ++v.feed_ceiling;
    for (Axis a : kAxes) {
      if (std::abs(s.velocity[a]) > limits.max_feedrate[a] + 1e-6) ++v.axis_ceiling;
    }
  }
  for (std::size_t k = 0; k + 1 < segs.size(); ++k) {
    // Speeds are mm/s internally; the tolerance is 1e-6 mm/min.
    if (std::abs(segs[k].exit_speed - segs[k + 1].entry_speed) * 60.0 >= 1e-6) ++v.continuity;
    const double theta = features::corner_cosine(tp.locations[k], tp.locations[k + 1], tp.locations[k + 2]);
    if (theta >= 1.0 && segs[k].exit_speed * 60.0 >= 1e-6) ++v.reversal;
  }
  // Velocity direction changes instantly at a junction, so the per-axis bound
  // is checked between consecutive dense steps inside one segment.
  for (std::size_t i = 1; i < traj.dense.size(); ++i) {
    const auto& p = traj.dense[i - 1];
    const auto& q = traj.dense[i];
    if (p.segment != q.segment) continue;
    const double dt = q.t - p.t;
    for (Axis a : kAxes) {
      const double accel = std::abs(q.velocity[a] - p.velocity[a]) / 60.0 / dt;  // mm/s^2
      if (accel > limits.max_acceleration[a] * (1.0 + 1e-6) + 1e-6) ++v.acceleration;
    }
  }
  if (sim::measured_cycle_time(traj) < predictor::cam_baseline_time(tp) - 1e-12) ++v.cam_bound;
  return v;
}

/// True when some junction is not straight-through.
inline bool has_corner(const gcode::Toolpath& tp) {
  for (std::size_t i = 1; i + 1 < tp.size(); ++i) {
    if (features::corner_cosine(tp.locations[i - 1], tp.locations[i], tp.locations[i + 1]) > -1.0 + 1e-12) {
      return true;
    }
  }
  return false;
}

}  // namespace cycletime::physics
