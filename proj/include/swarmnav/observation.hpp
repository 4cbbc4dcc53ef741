#pragma once

#include <span>
#include <vector>

#include "swarmnav/geodesic.hpp"
#include "swarmnav/sensing.hpp"
#include "swarmnav/vec3.hpp"
#include "swarmnav/world.hpp"

namespace swarmnav {

/// Squashing x / (1 + x) for x >= 0; maps +inf to 1.
inline double squash(double x) {
  if (x == kUnreachable) return 1.0;
  return x / (1.0 + x);
}

struct ObservationConfig {
  int bins_per_axis = 32;        // K
  double comm_radius = 9.0;      // D_c
  double safe_radius = 3.0;      // D_s
  int sensor_count = 18;         // J
  double sensor_range = 7.0;     // D_sen

  int width() const { return 4 + 3 * bins_per_axis + sensor_count; }

  bool operator==(const ObservationConfig&) const = default;
};

struct TargetEncoding {
  Vec3 direction;            // unit vector towards the target, zero when coincident
  double squashed_distance;  // squash(b), b geodesic if a field is given
};

/// Direction is always Euclidean; distance comes from `field` when given.
TargetEncoding encode_target(const Vec3& agent_pos, const Target& target, const DistanceField* field);

/// Histogram of neighbor offset components, K bins per axis concatenated
/// x, y, z. Only neighbors at distance b in [safe, comm] count; each adds
/// (1 - squash(b)) / (3W) to one bin per axis, W being the in-band count.
std::vector<double> hvc(const Vec3& agent_pos, std::span<const Vec3> neighbor_positions, int bins,
                        double comm_radius, double safe_radius);

/// Full observation: [direction(3), squashed distance(1), histogram(3K), sensors(J)].
/// `tracked_target` is the id of the agent's assigned target.
std::vector<double> assemble(const AgentState& agent, const WorldState& world, int tracked_target,
                             const FieldCache* fields, const ObservationConfig& config,
                             const SensorArray& sensors);

/// Same layout, with precomputed sensor readings.
void assemble_into(std::span<double> out, const AgentState& agent, const WorldState& world, int tracked_target,
                   const DistanceField* field, const ObservationConfig& config, const SensorReadings& readings);

}  // namespace swarmnav
