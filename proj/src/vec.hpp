#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace efem {

/// Fixed 3-vector used for both 2D and 3D points; 2D data keeps z = 0.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double& operator[](std::size_t i) { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr Vec3& operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// Measure of a simplex given by its dim+1 vertices (length, area, or volume).
inline double simplex_measure(int dim, const Vec3* v) {
  switch (dim) {
    case 1:
      return norm(v[1] - v[0]);
    case 2:
      return 0.5 * norm(cross(v[1] - v[0], v[2] - v[0]));
    default:
      return std::abs(dot(cross(v[1] - v[0], v[2] - v[0]), v[3] - v[0])) / 6.0;
  }
}

/// Signed measure in the embedding dimension (positive for CCW triangles / right-handed tets).
inline double signed_measure(int dim, const Vec3* v) {
  if (dim == 2) {
    const Vec3 a = v[1] - v[0];
    const Vec3 b = v[2] - v[0];
    return 0.5 * (a.x * b.y - a.y * b.x);
  }
  return dot(cross(v[1] - v[0], v[2] - v[0]), v[3] - v[0]) / 6.0;
}

}  // namespace efem
