#pragma once

// Telemetry alignment, labeled per-axis datasets, normalization and the
// train / validation / test split.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cycletime/error.hpp"
#include "cycletime/features.hpp"
#include "cycletime/gcode.hpp"
#include "cycletime/geometry.hpp"
#include "cycletime/log.hpp"
#include "cycletime/normalization.hpp"

namespace cycletime::dataset {

using features::FeatureRow;
using features::FeatureValues;
using gcode::Toolpath;

inline constexpr double kDefaultCoverageThreshold = 2.0;  // mm

struct TelemetrySample {
  double t = 0.0;  // s since program start
  Vec3 position;   // mm
  Vec3 velocity;   // mm/min, signed per axis

  bool operator==(const TelemetrySample&) const = default;
};

struct TelemetryLog {
  std::vector<TelemetrySample> samples;
  double nominal_rate = 0.0;  // Hz
  std::string source_name;
};

/// Throws unless the log has at least two samples, finite values and strictly
/// increasing timestamps.
inline void validate_log(const TelemetryLog& log) {
  if (log.samples.empty()) throw Error(ErrorKind::EmptyLog, "telemetry log has no samples");
  if (log.samples.size() < 2) {
    throw Error(ErrorKind::EmptyLog, "telemetry log needs at least two samples");
  }
  for (std::size_t i = 0; i < log.samples.size(); ++i) {
    const auto& s = log.samples[i];
    const bool finite = std::isfinite(s.t) && std::isfinite(s.position.x) &&
                        std::isfinite(s.position.y) && std::isfinite(s.position.z) &&
                        std::isfinite(s.velocity.x) && std::isfinite(s.velocity.y) &&
                        std::isfinite(s.velocity.z);
    if (!finite) {
      throw Error(ErrorKind::InvalidConfig, "non-finite telemetry sample " + std::to_string(i));
    }
    if (i > 0 && !(s.t > log.samples[i - 1].t)) {
      throw Error(ErrorKind::InvalidConfig,
                  "telemetry timestamps not strictly increasing at sample " + std::to_string(i));
    }
  }
}

struct AlignedTarget {
  Vec3 velocity;
  double distance = 0.0;  // mm from the cutter location to the matched sample
  double sample_time = 0.0;
  std::size_t sample_index = 0;
};

struct Alignment {
  std::map<int, AlignedTarget> by_location;
  /// Locations whose nearest sample lies beyond the coverage threshold.
  std::vector<int> coverage_warnings;
};

/// Matches every interior cutter location to the telemetry sample nearest in
/// position. Ties go to the earlier timestamp; a sample may serve several
/// locations.
inline Alignment align_telemetry(const Toolpath& tp, const TelemetryLog& log,
                                 double coverage_threshold = kDefaultCoverageThreshold) {
  if (log.samples.empty()) throw Error(ErrorKind::EmptyLog, "telemetry log has no samples");
  Alignment out;
  for (std::size_t i = 1; i + 1 < tp.size(); ++i) {
    const Vec3& p = tp.locations[i].position;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_index = 0;
    for (std::size_t k = 0; k < log.samples.size(); ++k) {
      const auto& s = log.samples[k];
      const Vec3 d = s.position - p;
      const double d2 = dot(d, d);
      if (d2 < best || (d2 == best && s.t < log.samples[best_index].t)) {
        best = d2;
        best_index = k;
      }
    }
    const auto& s = log.samples[best_index];
    AlignedTarget target{s.velocity, std::sqrt(best), s.t, best_index};
    const int n = tp.locations[i].index;
    if (target.distance > coverage_threshold) out.coverage_warnings.push_back(n);
    out.by_location.emplace(n, target);
  }
  if (!out.coverage_warnings.empty()) {
    logger()->warn("{}: {} cutter locations matched beyond {} mm", tp.source_name,
                   out.coverage_warnings.size(), coverage_threshold);
  }
  return out;
}

struct LabeledRow {
  FeatureValues features{};
  double target = 0.0;  // measured axis feedrate, mm/min
  int location_index = 0;
  std::string source_name;

  bool operator==(const LabeledRow&) const = default;
};

struct LabeledDataset {
  Axis axis = Axis::X;
  std::vector<LabeledRow> rows;
  Normalization normalization;
  bool normalized = false;

  bool empty() const { return rows.empty(); }
  std::size_t size() const { return rows.size(); }
};

/// Pairs feature rows with aligned targets. Locations missing from either
/// input are left out.
inline PerAxis<LabeledDataset> build_dataset(const PerAxis<std::vector<FeatureRow>>& features,
                                             const Alignment& aligned,
                                             const std::string& source_name = {}) {
  PerAxis<LabeledDataset> out;
  for (Axis axis : kAxes) {
    auto& ds = out[axis];
    ds.axis = axis;
    for (const auto& row : features[axis]) {
      const auto it = aligned.by_location.find(row.location_index);
      if (it == aligned.by_location.end()) continue;
      ds.rows.push_back({row.values, it->second.velocity[axis], row.location_index, source_name});
    }
    if (ds.rows.empty()) {
      throw Error(ErrorKind::NoOverlap,
                  "no cutter location has both features and an aligned target");
    }
  }
  return out;
}

/// Per-column min-max maps computed over `ds`.
inline Normalization fit_normalization_maps(const LabeledDataset& ds) {
  if (ds.rows.empty()) throw Error(ErrorKind::EmptyDataset, "cannot fit maps on an empty dataset");
  Normalization norm;
  norm.features.resize(features::kFeatureCount);
  for (std::size_t c = 0; c < features::kFeatureCount; ++c) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& row : ds.rows) {
      lo = std::min(lo, row.features[c]);
      hi = std::max(hi, row.features[c]);
    }
    norm.features[c] = AffineMap::fit(lo, hi);
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& row : ds.rows) {
    lo = std::min(lo, row.target);
    hi = std::max(hi, row.target);
  }
  norm.target = AffineMap::fit(lo, hi);
  return norm;
}

/// Maps features and targets with `norm`. Values outside the fitted range
/// are left unclamped.
inline LabeledDataset apply_normalization(const LabeledDataset& ds, const Normalization& norm) {
  LabeledDataset out = ds;
  for (auto& row : out.rows) {
    for (std::size_t c = 0; c < features::kFeatureCount; ++c) {
      row.features[c] = norm.features[c].normalize(row.features[c]);
    }
    row.target = norm.target.normalize(row.target);
  }
  out.normalization = norm;
  out.normalized = true;
  return out;
}

/// Fits maps on the (training) dataset and returns it normalized.
inline LabeledDataset fit_normalization(const LabeledDataset& train) {
  return apply_normalization(train, fit_normalization_maps(train));
}

/// Half-open fraction [begin, end) of a source's rows, in location order.
struct FractionRange {
  double begin = 0.0;
  double end = 1.0;
};

struct SourceRange {
  std::string source;
  FractionRange range;
};

struct SplitSpec {
  std::vector<std::string> train;
  SourceRange validation;
  SourceRange test;
};

struct Split {
  LabeledDataset train;
  LabeledDataset validation;
  LabeledDataset test;
};

/// Row index range [first, last) selected by `range` out of `count` rows.
inline std::pair<std::size_t, std::size_t> fraction_rows(FractionRange range, std::size_t count) {
  const auto at = [count](double f) {
    return std::min(count, static_cast<std::size_t>(std::floor(f * static_cast<double>(count))));
  };
  return {at(range.begin), at(range.end)};
}

inline Split split(const std::map<std::string, LabeledDataset>& sources, const SplitSpec& spec) {
  const auto find = [&](const std::string& name) -> const LabeledDataset& {
    const auto it = sources.find(name);
    if (it == sources.end()) throw Error(ErrorKind::UnknownSource, "unknown source '" + name + "'");
    return it->second;
  };
  for (const auto* r : {&spec.validation.range, &spec.test.range}) {
    if (!(r->begin >= 0.0 && r->begin < r->end && r->end <= 1.0)) {
      throw Error(ErrorKind::InvalidConfig, "fraction range must satisfy 0 <= begin < end <= 1");
    }
  }
  if (spec.train.empty()) throw Error(ErrorKind::EmptySet, "split has no training sources");
  if (spec.validation.source == spec.test.source &&
      std::max(spec.validation.range.begin, spec.test.range.begin) <
          std::min(spec.validation.range.end, spec.test.range.end)) {
    throw Error(ErrorKind::OverlappingRanges, "validation and test ranges of '" +
                                                  spec.validation.source + "' overlap");
  }
  std::set<std::string> seen;
  for (const auto& name : spec.train) {
    if (name == spec.validation.source || name == spec.test.source) {
      throw Error(ErrorKind::OverlappingRanges,
                  "training source '" + name + "' is also used for validation or test");
    }
    if (!seen.insert(name).second) {
      throw Error(ErrorKind::OverlappingRanges, "training source '" + name + "' listed twice");
    }
  }

  const auto slice = [&](const SourceRange& sr) {
    const LabeledDataset& src = find(sr.source);
    LabeledDataset out;
    out.axis = src.axis;
    const auto [first, last] = fraction_rows(sr.range, src.rows.size());
    out.rows.assign(src.rows.begin() + static_cast<std::ptrdiff_t>(first),
                    src.rows.begin() + static_cast<std::ptrdiff_t>(last));
    return out;
  };

  Split out;
  out.train.axis = find(spec.train.front()).axis;
  for (const auto& name : spec.train) {
    const auto& src = find(name);
    out.train.rows.insert(out.train.rows.end(), src.rows.begin(), src.rows.end());
  }
  out.validation = slice(spec.validation);
  out.test = slice(spec.test);
  return out;
}

}  // namespace cycletime::dataset
