#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace cycletime {

/// Min-max map of one column onto [-1, 1]. A constant column is flagged
/// zero-width and maps every input to 0.
struct AffineMap {
  double offset = 0.0;
  double scale = 1.0;
  bool zero_width = false;

  static AffineMap fit(double min, double max) {
    AffineMap m;
    m.offset = 0.5 * (max + min);
    const double half = 0.5 * (max - min);
    if (half > 0.0) {
      m.scale = half;
    } else {
      m.scale = 1.0;
      m.zero_width = true;
    }
    return m;
  }

  double normalize(double x) const { return zero_width ? 0.0 : (x - offset) / scale; }
  double denormalize(double y) const { return offset + scale * y; }

  bool operator==(const AffineMap&) const = default;
};

struct Normalization {
  std::vector<AffineMap> features;
  AffineMap target;

  std::vector<double> normalize_features(std::span<const double> raw) const {
    std::vector<double> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      out[i] = i < features.size() ? features[i].normalize(raw[i]) : raw[i];
    }
    return out;
  }

  bool operator==(const Normalization&) const = default;
};

}  // namespace cycletime
