// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>

namespace ksafem {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3() = default;
  Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  double& operator[](int i) { return (&x)[i]; }
  double operator[](int i) const { return (&x)[i]; }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x; y += o.y; z += o.z;
    return *this;
  }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline Vec3 midpoint(const Vec3& a, const Vec3& b) {
  return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y), 0.5 * (a.z + b.z)};
}

/// Axis-aligned box; the computational domain is always one of these.
struct Box {
  Vec3 lo, hi;

  double extent(int axis) const { return hi[axis] - lo[axis]; }
  double diameter() const { return norm(hi - lo); }
  double volume() const { return extent(0) * extent(1) * extent(2); }
  Vec3 center() const { return midpoint(lo, hi); }
  bool nondegenerate() const {
    return extent(0) > 0.0 && extent(1) > 0.0 && extent(2) > 0.0;
  }
  bool contains(const Vec3& p, double tol = 0.0) const {
    for (int a = 0; a < 3; ++a)
      if (p[a] < lo[a] - tol || p[a] > hi[a] + tol) return false;
    return true;
  }
};

// Signed volume of the tet (a,b,c,d); positive for a right-handed ordering.
inline double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return dot(cross(b - a, c - a), d - a) / 6.0;
}

inline double tet_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return std::abs(signed_volume(a, b, c, d));
}

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * norm(cross(b - a, c - a));
}

}  // namespace ksafem
