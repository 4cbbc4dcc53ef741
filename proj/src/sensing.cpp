#include "swarmnav/sensing.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "swarmnav/error.hpp"

namespace swarmnav {

SensorArray SensorArray::standard(int count, double range) {
  if (count != 6 && count != 18 && count != 26) throw ConfigError("sensor count must be 6, 18 or 26");
  if (!(range > 0.0)) throw ConfigError("sensor range must be > 0");
  SensorArray a;
  a.range = range;
  a.directions = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  if (count >= 18) {
    const double s = 1.0 / std::sqrt(2.0);
    const int signs[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
    const int planes[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (const auto& plane : planes) {
      for (const auto& sign : signs) {
        Vec3 d;
        d[plane[0]] = sign[0] * s;
        d[plane[1]] = sign[1] * s;
        a.directions.push_back(d);
      }
    }
  }
  if (count == 26) {
    const double s = 1.0 / std::sqrt(3.0);
    for (int sx : {1, -1}) {
      for (int sy : {1, -1}) {
        for (int sz : {1, -1}) a.directions.push_back({sx * s, sy * s, sz * s});
      }
    }
  }
  return a;
}

double SensorReadings::sum() const { return std::accumulate(values.begin(), values.end(), 0.0); }

std::optional<double> ray_box_distance(const Vec3& origin, const Vec3& dir, const Aabb& box) {
  const Vec3 lo = box.lo();
  const Vec3 hi = box.hi();
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    if (dir[axis] == 0.0) {
      if (origin[axis] < lo[axis] || origin[axis] > hi[axis]) return std::nullopt;
      continue;
    }
    double t0 = (lo[axis] - origin[axis]) / dir[axis];
    double t1 = (hi[axis] - origin[axis]) / dir[axis];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
  }
  if (t_near > t_far || t_far < 0.0) return std::nullopt;
  return std::max(t_near, 0.0);
}

double ray_arena_distance(const Vec3& origin, const Vec3& dir, double axis_length) {
  double best = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    if (dir[axis] > 0.0) {
      best = std::min(best, (axis_length - origin[axis]) / dir[axis]);
    } else if (dir[axis] < 0.0) {
      best = std::min(best, (0.0 - origin[axis]) / dir[axis]);
    }
  }
  return std::max(best, 0.0);
}

double ray_hit_distance(const Vec3& origin, const Vec3& dir, const WorldState& world, double max_range) {
  double best = ray_arena_distance(origin, dir, world.config.axis_length);
  for (const auto& o : world.obstacles) {
    // Boxes farther than the sensing range cannot produce a reading.
    if (o.box.distance_to(origin) > max_range) continue;
    if (auto t = ray_box_distance(origin, dir, o.box); t && *t < best) best = *t;
  }
  return best;
}

SensorReadings sense(const Vec3& position, const WorldState& world, const SensorArray& array) {
  SensorReadings r;
  r.values.reserve(array.directions.size());
  for (const auto& dir : array.directions) {
    const double c = ray_hit_distance(position, dir, world, array.range);
    r.values.push_back(c <= array.range ? 1.0 - c / array.range : 0.0);
  }
  return r;
}

}  // namespace swarmnav
