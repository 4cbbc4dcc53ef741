#include "swarmnav/observation.hpp"

#include <algorithm>
#include <cmath>

#include "swarmnav/error.hpp"

namespace swarmnav {

TargetEncoding encode_target(const Vec3& agent_pos, const Target& target, const DistanceField* field) {
  const Vec3 offset = target.position - agent_pos;
  const double euclid = offset.norm();
  if (euclid == 0.0) return {{}, 0.0};
  const double b = field ? geodesic_distance(*field, agent_pos) : euclid;
  return {offset / euclid, squash(b)};
}

std::vector<double> hvc(const Vec3& agent_pos, std::span<const Vec3> neighbor_positions, int bins,
                        double comm_radius, double safe_radius) {
  std::vector<double> hist(static_cast<std::size_t>(3 * bins), 0.0);
  std::vector<std::pair<Vec3, double>> in_band;
  for (const auto& p : neighbor_positions) {
    const Vec3 rel = p - agent_pos;
    const double b = rel.norm();
    if (b >= safe_radius && b <= comm_radius) in_band.push_back({rel, b});
  }
  if (in_band.empty()) return hist;
  const double norm = 3.0 * static_cast<double>(in_band.size());
  for (const auto& [rel, b] : in_band) {
    const double weight = (1.0 - squash(b)) / norm;
    for (int axis = 0; axis < 3; ++axis) {
      const double c = std::clamp(rel[axis], -comm_radius, comm_radius);
      const int j = std::min(bins - 1, static_cast<int>(std::floor((c + comm_radius) / (2.0 * comm_radius) * bins)));
      hist[static_cast<std::size_t>(axis * bins + j)] += weight;
    }
  }
  return hist;
}

void assemble_into(std::span<double> out, const AgentState& agent, const WorldState& world, int tracked_target,
                   const DistanceField* field, const ObservationConfig& config, const SensorReadings& readings) {
  if (static_cast<int>(out.size()) != config.width()) throw ContractError("observation buffer has wrong width");
  if (static_cast<int>(readings.values.size()) != config.sensor_count) throw ContractError("sensor count mismatch");
  const Target* target = world.find_target(tracked_target);
  if (!target) throw ContractError("agent tracks unknown target " + std::to_string(tracked_target));

  const TargetEncoding enc = encode_target(agent.position, *target, field);
  out[0] = enc.direction.x;
  out[1] = enc.direction.y;
  out[2] = enc.direction.z;
  out[3] = enc.squashed_distance;

  std::vector<Vec3> neighbors;
  for (const auto& other : world.agents) {
    if (other.id == agent.id || !other.alive) continue;
    if (distance(other.position, agent.position) <= config.comm_radius) neighbors.push_back(other.position);
  }
  const auto hist = hvc(agent.position, neighbors, config.bins_per_axis, config.comm_radius, config.safe_radius);
  std::copy(hist.begin(), hist.end(), out.begin() + 4);
  std::copy(readings.values.begin(), readings.values.end(), out.begin() + 4 + static_cast<long>(hist.size()));
}

std::vector<double> assemble(const AgentState& agent, const WorldState& world, int tracked_target,
                             const FieldCache* fields, const ObservationConfig& config,
                             const SensorArray& sensors) {
  std::vector<double> out(static_cast<std::size_t>(config.width()));
  const DistanceField* field = fields ? fields->field(tracked_target) : nullptr;
  assemble_into(out, agent, world, tracked_target, field, config, sense(agent.position, world, sensors));
  return out;
}

}  // namespace swarmnav
