#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>

namespace swarmnav {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  constexpr double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  constexpr double& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
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
  constexpr bool operator==(const Vec3&) const = default;

  constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  constexpr double squared_norm() const { return dot(*this); }
  double norm() const { return std::sqrt(squared_norm()); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }

  /// Unit vector, or zero when the norm is zero.
  Vec3 normalized() const {
    const double n = norm();
    return n > 0.0 ? *this / n : Vec3{};
  }
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

inline Vec3 clamp_components(const Vec3& v, double limit) {
  return {std::clamp(v.x, -limit, limit), std::clamp(v.y, -limit, limit),
          std::clamp(v.z, -limit, limit)};
}

inline Vec3 min_components(const Vec3& a, const Vec3& b) {
  return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}

inline Vec3 max_components(const Vec3& a, const Vec3& b) {
  return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}

inline std::ostream& operator<<(std::ostream& os, const Vec3& v) {
  return os << '(' << v.x << ", " << v.y << ", " << v.z << ')';
}

/// Axis-aligned box given by center and half extents.
struct Aabb {
  Vec3 center;
  Vec3 half_extents;

  Vec3 lo() const { return center - half_extents; }
  Vec3 hi() const { return center + half_extents; }

  bool contains(const Vec3& p) const {
    const Vec3 l = lo();
    const Vec3 h = hi();
    return p.x >= l.x && p.x <= h.x && p.y >= l.y && p.y <= h.y && p.z >= l.z && p.z <= h.z;
  }

  /// Euclidean distance from p to the box; zero inside.
  double distance_to(const Vec3& p) const {
    const Vec3 l = lo();
    const Vec3 h = hi();
    const Vec3 d{std::max({l.x - p.x, 0.0, p.x - h.x}), std::max({l.y - p.y, 0.0, p.y - h.y}),
                 std::max({l.z - p.z, 0.0, p.z - h.z})};
    return d.norm();
  }

  /// Positive-volume overlap (touching faces do not count).
  bool overlaps(const Aabb& o) const {
    const Vec3 al = lo(), ah = hi(), bl = o.lo(), bh = o.hi();
    return al.x < bh.x && ah.x > bl.x && al.y < bh.y && ah.y > bl.y && al.z < bh.z && ah.z > bl.z;
  }

  bool operator==(const Aabb&) const = default;
};

}  // namespace swarmnav
