#pragma once

// Synthetic machine tool: an acceleration-limited look-ahead planner with a
// cosine-based corner speed law, executed as exact trapezoidal segment
// profiles, plus a sparse noisy telemetry sampler.
//
// Internally speeds are mm/s and accelerations mm/s^2; everything that leaves
// this module (telemetry velocities, limits file) uses mm/min for feedrates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "cycletime/dataset.hpp"
#include "cycletime/error.hpp"
#include "cycletime/features.hpp"
#include "cycletime/gcode.hpp"
#include "cycletime/geometry.hpp"

namespace cycletime::sim {

using dataset::TelemetryLog;
using dataset::TelemetrySample;
using gcode::Toolpath;

inline constexpr double kDenseRate = 1000.0;  // Hz

struct MachineLimits {
  Vec3 max_feedrate{20000.0, 20000.0, 10000.0};  // mm/min per axis
  Vec3 max_acceleration{150.0, 120.0, 100.0};    // mm/s^2 per axis
  double rapid_rate = gcode::kDefaultRapidRate;  // mm/min
  double corner_exponent = 1.0;
  double sample_rate = 5.0;    // Hz
  double noise_stddev = 0.0;   // mm/min, added to telemetry velocities
  std::uint64_t seed = 1;

  void validate() const {
    for (Axis a : kAxes) {
      if (!(max_feedrate[a] > 0.0) || !(max_acceleration[a] > 0.0)) {
        throw Error(ErrorKind::InvalidLimits, "axis feedrate and acceleration limits must be positive");
      }
    }
    if (!(rapid_rate > 0.0)) throw Error(ErrorKind::InvalidLimits, "rapid_rate must be positive");
    if (!(corner_exponent > 0.0)) throw Error(ErrorKind::InvalidLimits, "corner_exponent must be positive");
    if (!(sample_rate > 0.0)) throw Error(ErrorKind::InvalidLimits, "sample_rate must be positive");
    if (!(noise_stddev >= 0.0)) throw Error(ErrorKind::InvalidLimits, "noise_stddev must be non-negative");
  }
};

/// Junction speed allowed at a corner with cosine `theta`:
/// v_cmd * ((1 - theta) / 2)^gamma. Straight-through keeps v_cmd, a reversal
/// stops.
inline double corner_speed_limit(double theta, double v_cmd, double gamma) {
  const double c = std::clamp((1.0 - theta) / 2.0, 0.0, 1.0);
  return v_cmd * std::pow(c, gamma);
}

/// Execution record of one segment (from location k to k + 1, 0-based k).
struct SegmentRecord {
  Vec3 start;
  Vec3 direction;  // unit vector
  double length = 0.0;           // mm
  double commanded_speed = 0.0;  // mm/min, from the F word or rapid rate
  double speed_limit = 0.0;      // mm/s after axis-limit projection
  double acceleration = 0.0;     // mm/s^2 along the path
  double entry_speed = 0.0;      // mm/s
  double exit_speed = 0.0;
  double peak_speed = 0.0;
  double accel_time = 0.0;  // s
  double cruise_time = 0.0;
  double decel_time = 0.0;
  double start_time = 0.0;

  double duration() const { return accel_time + cruise_time + decel_time; }
  double end_time() const { return start_time + duration(); }

  /// Distance travelled and speed (mm, mm/s) at local time tau.
  std::pair<double, double> at(double tau) const {
    tau = std::clamp(tau, 0.0, duration());
    if (tau <= accel_time) {
      return {entry_speed * tau + 0.5 * acceleration * tau * tau, entry_speed + acceleration * tau};
    }
    const double d1 = entry_speed * accel_time + 0.5 * acceleration * accel_time * accel_time;
    tau -= accel_time;
    if (tau <= cruise_time) return {d1 + peak_speed * tau, peak_speed};
    const double d2 = d1 + peak_speed * cruise_time;
    tau = std::min(tau - cruise_time, decel_time);
    const double v = std::max(0.0, peak_speed - acceleration * tau);
    return {std::min(length, d2 + peak_speed * tau - 0.5 * acceleration * tau * tau), v};
  }
};

struct TrajectoryState {
  double t = 0.0;
  Vec3 position;
  Vec3 velocity;  // mm/min per axis
  std::size_t segment = 0;
};

struct Trajectory {
  std::vector<SegmentRecord> segments;
  std::vector<TrajectoryState> dense;  // kDenseRate samples, t = k / kDenseRate
  double total_time = 0.0;
  Vec3 final_position;

  /// Exact state at time t (clamped to [0, total_time]).
  TrajectoryState state_at(double t) const {
    TrajectoryState s;
    s.t = t;
    if (segments.empty()) {
      s.position = final_position;
      return s;
    }
    auto it = std::upper_bound(segments.begin(), segments.end(), t,
                               [](double v, const SegmentRecord& r) { return v < r.start_time; });
    if (it != segments.begin()) --it;
    const auto& seg = *it;
    const auto [d, v] = seg.at(t - seg.start_time);
    s.position = seg.start + seg.direction * d;
    s.velocity = seg.direction * (v * 60.0);
    s.segment = static_cast<std::size_t>(it - segments.begin());
    return s;
  }
};

namespace detail {

inline double axis_projected(const Vec3& u, const Vec3& per_axis, double along) {
  double lim = along;
  for (Axis a : kAxes) {
    const double c = std::abs(u[a]);
    if (c > 1e-12) lim = std::min(lim, per_axis[a] / c);
  }
  return lim;
}

}  // namespace detail

/// Plans junction speeds with corner caps and forward/backward acceleration
/// passes, then executes each segment as a trapezoid (or triangle). Starts
/// and ends at rest; the dense series is sampled at kDenseRate.
inline Trajectory plan_profile(const Toolpath& tp, const MachineLimits& limits) {
  limits.validate();
  Trajectory traj;
  const auto& cl = tp.locations;
  if (cl.empty()) return traj;
  traj.final_position = cl.back().position;
  const std::size_t nseg = cl.size() - 1;
  if (nseg == 0) {
    traj.dense.push_back({0.0, cl.front().position, {}, 0});
    return traj;
  }

  const double inf = std::numeric_limits<double>::infinity();
  auto& segs = traj.segments;
  segs.resize(nseg);
  for (std::size_t k = 0; k < nseg; ++k) {
    auto& s = segs[k];
    const Vec3 delta = cl[k + 1].position - cl[k].position;
    s.start = cl[k].position;
    s.length = norm(delta);
    if (s.length < features::kDegenerateLength) {
      throw Error(ErrorKind::DegenerateSegment, "zero-length segment in toolpath");
    }
    s.direction = delta / s.length;
    s.commanded_speed = cl[k + 1].mode == gcode::MotionMode::Rapid
                            ? std::min(cl[k + 1].commanded_feedrate, limits.rapid_rate)
                            : cl[k + 1].commanded_feedrate;
    s.speed_limit = detail::axis_projected(s.direction, limits.max_feedrate / 60.0,
                                           s.commanded_speed / 60.0);
    s.acceleration = detail::axis_projected(s.direction, limits.max_acceleration, inf);
  }

  // Junction j sits at location j; 0 and nseg are the rest states.
  std::vector<double> v(nseg + 1, 0.0);
  for (std::size_t j = 1; j < nseg; ++j) {
    const double theta = features::corner_cosine(cl[j - 1], cl[j], cl[j + 1]);
    const double cap = std::min(segs[j - 1].speed_limit, segs[j].speed_limit);
    v[j] = corner_speed_limit(theta, cap, limits.corner_exponent);
  }
  for (std::size_t k = 0; k < nseg; ++k) {
    v[k + 1] = std::min(v[k + 1], std::sqrt(v[k] * v[k] + 2.0 * segs[k].acceleration * segs[k].length));
  }
  for (std::size_t k = nseg; k-- > 0;) {
    v[k] = std::min(v[k], std::sqrt(v[k + 1] * v[k + 1] + 2.0 * segs[k].acceleration * segs[k].length));
  }

  double clock = 0.0;
  for (std::size_t k = 0; k < nseg; ++k) {
    auto& s = segs[k];
    const double a = s.acceleration;
    s.entry_speed = v[k];
    s.exit_speed = v[k + 1];
    const double reachable =
        std::sqrt(a * s.length + 0.5 * (s.entry_speed * s.entry_speed + s.exit_speed * s.exit_speed));
    s.peak_speed = std::max({std::min(s.speed_limit, reachable), s.entry_speed, s.exit_speed});
    const double d_acc = (s.peak_speed * s.peak_speed - s.entry_speed * s.entry_speed) / (2.0 * a);
    const double d_dec = (s.peak_speed * s.peak_speed - s.exit_speed * s.exit_speed) / (2.0 * a);
    const double d_cruise = std::max(0.0, s.length - d_acc - d_dec);
    s.accel_time = (s.peak_speed - s.entry_speed) / a;
    s.decel_time = (s.peak_speed - s.exit_speed) / a;
    s.cruise_time = s.peak_speed > 0.0 ? d_cruise / s.peak_speed : 0.0;
    s.start_time = clock;
    clock += s.duration();
  }
  traj.total_time = clock;

  const auto steps = static_cast<std::size_t>(std::floor(traj.total_time * kDenseRate));
  traj.dense.reserve(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    traj.dense.push_back(traj.state_at(static_cast<double>(i) / kDenseRate));
  }
  return traj;
}

/// Samples the trajectory at limits.sample_rate (t = k / rate for every
/// instant inside the run) and adds seeded Gaussian noise to velocities.
inline TelemetryLog emit_telemetry(const Trajectory& traj, const MachineLimits& limits,
                                   std::string source_name = {}) {
  limits.validate();
  TelemetryLog log;
  log.nominal_rate = limits.sample_rate;
  log.source_name = std::move(source_name);
  std::mt19937_64 rng(limits.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) / limits.sample_rate;
    if (t > traj.total_time) break;
    const auto state = traj.state_at(t);
    TelemetrySample s{t, state.position, state.velocity};
    if (limits.noise_stddev > 0.0) {
      s.velocity.x += limits.noise_stddev * noise(rng);
      s.velocity.y += limits.noise_stddev * noise(rng);
      s.velocity.z += limits.noise_stddev * noise(rng);
    }
    log.samples.push_back(s);
  }
  return log;
}

inline double measured_cycle_time(const Trajectory& traj) { return traj.total_time; }

}  // namespace cycletime::sim
