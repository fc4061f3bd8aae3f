#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace gsmhd {

// Point/vector in the (r, z) poloidal plane.
struct Vec2 {
  double r = 0.0;
  double z = 0.0;

  Vec2() = default;
  Vec2(double r_, double z_) : r(r_), z(z_) {}

  Vec2 operator+(const Vec2 &o) const { return {r + o.r, z + o.z}; }
  Vec2 operator-(const Vec2 &o) const { return {r - o.r, z - o.z}; }
  Vec2 operator*(double s) const { return {r * s, z * s}; }
  Vec2 &operator+=(const Vec2 &o) {
    r += o.r;
    z += o.z;
    return *this;
  }
};

inline Vec2 operator*(double s, const Vec2 &v) { return v * s; }

inline double dot(const Vec2 &a, const Vec2 &b) { return a.r * b.r + a.z * b.z; }
inline double norm(const Vec2 &a) { return std::sqrt(dot(a, a)); }

// 90-degree rotation: (a_r, a_z) -> (-a_z, a_r). Satisfies a.perp(b) == -perp(a).b.
inline Vec2 perp(const Vec2 &a) { return {-a.z, a.r}; }

// Signed doubled area of triangle (a, b, c); positive for counterclockwise order.
inline double cross2(const Vec2 &u, const Vec2 &v) { return u.r * v.z - u.z * v.r; }

using index_t = std::ptrdiff_t;

}  // namespace gsmhd
