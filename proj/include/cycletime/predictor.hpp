#pragma once

// Applies per-axis regressors to a toolpath and turns the predicted axis
// feedrates into a cycle time. The commanded-feedrate (CAM) estimate and the
// percent-error metric live here too.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cycletime/error.hpp"
#include "cycletime/features.hpp"
#include "cycletime/gcode.hpp"
#include "cycletime/geometry.hpp"
#include "cycletime/mlp.hpp"

namespace cycletime::predictor {

using gcode::Toolpath;

inline constexpr double kFeedrateFloor = 1.0;  // mm/min

/// Anything that maps the nine raw features of one axis to a feedrate in
/// mm/min. mlp::Mlp satisfies it through its stored normalization.
template <typename M>
concept AxisRegressor = requires(const M& m, std::span<const double> x) {
  { m.predict(x) } -> std::convertible_to<double>;
};

template <AxisRegressor M>
using AxisModelSet = PerAxis<M>;

inline void check_model_set(const AxisModelSet<mlp::Mlp>& models) {
  for (Axis a : kAxes) {
    if (models[a].spec().sizes.empty() || models[a].spec().inputs() != features::kFeatureCount) {
      throw Error(ErrorKind::ShapeMismatch,
                  std::string("model for axis ") + axis_letter(a) + " does not take 9 inputs");
    }
  }
}

struct LocationPrediction {
  int location_index = 0;
  Vec3 axis_feedrate;        // mm/min, signed
  double feedrate = 0.0;     // resultant, mm/min
};

inline double resultant_feedrate(double fx, double fy, double fz) {
  return std::sqrt(fx * fx + fy * fy + fz * fz);
}

inline double resultant_feedrate(const Vec3& f) { return resultant_feedrate(f.x, f.y, f.z); }

/// Predicted signed axis feedrates for every interior location n in [2, N-1].
template <AxisRegressor M>
std::vector<LocationPrediction> predict_axis_feedrates(const AxisModelSet<M>& models,
                                                       const Toolpath& tp) {
  const auto rows = features::extract_features(tp);
  const std::size_t count = rows[Axis::X].size();
  std::vector<LocationPrediction> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i].location_index = rows[Axis::X][i].location_index;
    for (Axis a : kAxes) {
      out[i].axis_feedrate[a] = static_cast<double>(models[a].predict(rows[a][i].values));
    }
    out[i].feedrate = resultant_feedrate(out[i].axis_feedrate);
  }
  return out;
}

/// Seconds at the commanded feedrate over every segment.
inline double cam_baseline_time(const Toolpath& tp) {
  double total = 0.0;
  for (std::size_t i = 1; i < tp.size(); ++i) {
    total += features::nominal_time(tp.locations[i - 1], tp.locations[i]);
  }
  return total;
}

struct SegmentTiming {
  int location_index = 0;  // segment ends at this location
  double length = 0.0;     // mm
  double commanded_feedrate = 0.0;
  double feedrate = 0.0;   // mm/min used for timing
  bool predicted = false;
  double seconds = 0.0;
};

/// Per-segment times: segments ending at a predicted location use the
/// (floored) predicted resultant, the rest use the commanded feedrate.
inline std::vector<SegmentTiming> segment_timings(const Toolpath& tp,
                                                  std::span<const LocationPrediction> predictions) {
  std::vector<SegmentTiming> out;
  out.reserve(tp.size());
  std::size_t p = 0;
  for (std::size_t i = 1; i < tp.size(); ++i) {
    const auto& cl = tp.locations[i];
    SegmentTiming s;
    s.location_index = cl.index;
    s.length = features::segment_length(tp.locations[i - 1].position, cl.position);
    s.commanded_feedrate = cl.commanded_feedrate;
    while (p < predictions.size() && predictions[p].location_index < cl.index) ++p;
    if (p < predictions.size() && predictions[p].location_index == cl.index) {
      s.feedrate = std::max(predictions[p].feedrate, kFeedrateFloor);
      s.predicted = true;
    } else {
      s.feedrate = cl.commanded_feedrate;
    }
    s.seconds = s.length / s.feedrate * 60.0;
    out.push_back(s);
  }
  return out;
}

inline double total_seconds(std::span<const SegmentTiming> timings) {
  double total = 0.0;
  for (const auto& s : timings) total += s.seconds;
  return total;
}

template <AxisRegressor M>
double predict_cycle_time(const AxisModelSet<M>& models, const Toolpath& tp) {
  const auto predictions = predict_axis_feedrates(models, tp);
  return total_seconds(segment_timings(tp, predictions));
}

/// 100 |predicted - measured| / measured, rounded to two decimals.
inline double evaluate(double predicted_seconds, double measured_seconds) {
  if (!(measured_seconds > 0.0)) {
    throw Error(ErrorKind::NonPositiveMeasured, "measured time must be positive");
  }
  const double pct = 100.0 * std::abs(predicted_seconds - measured_seconds) / measured_seconds;
  return std::round(pct * 100.0) / 100.0;
}

struct PredictionReport {
  std::string source_name;
  std::vector<LocationPrediction> locations;
  std::vector<SegmentTiming> segments;
  double predicted_cycle_time = 0.0;
  double cam_baseline_time = 0.0;
  std::optional<double> measured_time;
  std::optional<double> cam_error_percent;
  std::optional<double> nn_error_percent;
};

template <AxisRegressor M>
PredictionReport predict_report(const AxisModelSet<M>& models, const Toolpath& tp,
                                std::optional<double> measured_seconds = std::nullopt) {
  PredictionReport r;
  r.source_name = tp.source_name;
  r.locations = predict_axis_feedrates(models, tp);
  r.segments = segment_timings(tp, r.locations);
  r.predicted_cycle_time = total_seconds(r.segments);
  r.cam_baseline_time = cam_baseline_time(tp);
  if (measured_seconds) {
    r.measured_time = measured_seconds;
    r.cam_error_percent = evaluate(r.cam_baseline_time, *measured_seconds);
    r.nn_error_percent = evaluate(r.predicted_cycle_time, *measured_seconds);
  }
  return r;
}

}  // namespace cycletime::predictor
