#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

#include "cycletime/gcode.hpp"
#include "cycletime/io.hpp"

namespace cycletime::testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(CYCLETIME_FIXTURE_DIR) / name;
}

inline std::string fixture_text(const std::string& name) { return io::read_file(fixture(name)); }

struct Point {
  double x, y, z, f;
};

/// Linear-move toolpath straight from coordinates; the first point is a rapid.
inline gcode::Toolpath path_of(std::initializer_list<Point> pts, std::string name = "path") {
  gcode::Toolpath tp;
  tp.source_name = std::move(name);
  int n = 1;
  for (const auto& p : pts) {
    tp.locations.push_back({n, {p.x, p.y, p.z}, p.f,
                            n == 1 ? gcode::MotionMode::Rapid : gcode::MotionMode::Linear});
    ++n;
  }
  return tp;
}

/// Unit square driven around `laps` times at one feedrate, scaled by `side`.
inline gcode::Toolpath square_path(double side, double feed, int laps = 1) {
  gcode::Toolpath tp;
  tp.source_name = "square";
  const double xs[4] = {0, side, side, 0};
  const double ys[4] = {0, 0, side, side};
  int n = 1;
  for (int k = 0; k <= 4 * laps; ++k) {
    tp.locations.push_back({n++, {xs[k % 4], ys[k % 4], 0.0}, feed, gcode::MotionMode::Linear});
  }
  return tp;
}

}  // namespace cycletime::testing
