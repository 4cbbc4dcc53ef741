#pragma once

#include <optional>
#include <vector>

#include "swarmnav/vec3.hpp"
#include "swarmnav/world.hpp"

namespace swarmnav {

/// Fixed set of time-of-flight rays around an agent.
///
/// The standard 18-ray layout is the six axis directions (+x, -x, +y, -y, +z, -z)
/// followed by the twelve normalized cube-edge diagonals, grouped by plane
/// (xy, xz, yz) and within a plane ordered (+,+), (+,-), (-,+), (-,-).
/// The 26-ray layout appends the eight cube corners in the same sign order.
struct SensorArray {
  std::vector<Vec3> directions;
  double range = 7.0;

  /// Supported ray counts: 6, 18, 26.
  static SensorArray standard(int count = 18, double range = 7.0);
};

struct SensorReadings {
  std::vector<double> values;

  double sum() const;
};

/// Entry distance along a unit ray into a closed box; 0 if the origin is inside.
std::optional<double> ray_box_distance(const Vec3& origin, const Vec3& dir, const Aabb& box);

/// Distance along a ray from an interior point to the arena boundary.
double ray_arena_distance(const Vec3& origin, const Vec3& dir, double axis_length);

/// Nearest obstacle-or-wall hit distance along one ray.
double ray_hit_distance(const Vec3& origin, const Vec3& dir, const WorldState& world, double max_range);

/// Proximity readings 1 - c/range for hits within range, 0 otherwise. Walls
/// count as obstacles; agents and targets are invisible to the sensors.
SensorReadings sense(const Vec3& position, const WorldState& world, const SensorArray& array);

}  // namespace swarmnav
