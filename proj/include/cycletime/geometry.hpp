#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace cycletime {

enum class Axis { X = 0, Y = 1, Z = 2 };

inline constexpr std::array<Axis, 3> kAxes = {Axis::X, Axis::Y, Axis::Z};

constexpr char axis_letter(Axis axis) {
  switch (axis) {
    case Axis::X: return 'x';
    case Axis::Y: return 'y';
    case Axis::Z: return 'z';
  }
  return '?';
}

constexpr std::size_t axis_index(Axis axis) {
  return static_cast<std::size_t>(axis);
}

/// One value per machine axis, indexed by Axis.
template <typename T>
struct PerAxis {
  std::array<T, 3> values{};

  T& operator[](Axis axis) { return values[axis_index(axis)]; }
  const T& operator[](Axis axis) const { return values[axis_index(axis)]; }

  bool operator==(const PerAxis&) const = default;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double operator[](Axis axis) const {
    switch (axis) {
      case Axis::X: return x;
      case Axis::Y: return y;
      case Axis::Z: return z;
    }
    return 0.0;
  }
  constexpr double& operator[](Axis axis) {
    switch (axis) {
      case Axis::Y: return y;
      case Axis::Z: return z;
      default: return x;
    }
  }

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }

  constexpr bool operator==(const Vec3&) const = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

/// True when every coordinate differs by less than `tol`.
inline bool nearly_equal(const Vec3& a, const Vec3& b, double tol) {
  return std::abs(a.x - b.x) < tol && std::abs(a.y - b.y) < tol &&
         std::abs(a.z - b.z) < tol;
}

}  // namespace cycletime
