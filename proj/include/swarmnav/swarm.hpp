#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "swarmnav/geodesic.hpp"
#include "swarmnav/world.hpp"

namespace swarmnav {

/// Threshold communication graph over living agents and its connected
/// components. Components are ordered by their smallest member id.
struct SwarmGraph {
  std::vector<std::pair<int, int>> edges;     // (a, b) with a < b, sorted
  std::vector<std::vector<int>> components;   // member ids, ascending
  std::map<int, int> component_of;            // agent id -> component index
};

SwarmGraph build_graph(std::span<const AgentState> agents, double comm_radius);

struct Assignment {
  std::map<int, int> tracked_target;  // agent id -> target id
  std::vector<int> untracked_targets;  // targets left with a zero quota

  std::map<int, int> counts() const;
};

/// How assignment measures agent-target distance.
enum class DistanceMetric { euclidean, geodesic };

/// Distance from a point to a target under `metric`; geodesic uses the field
/// from `fields` and falls back to Euclidean when no field exists.
double target_distance(DistanceMetric metric, const FieldCache* fields, const Target& target, const Vec3& point);

/// Balanced greedy assignment: per-target quotas of floor(A/T) or ceil(A/T),
/// (agent, target) pairs taken in ascending distance, ties by (agent id,
/// target id).
Assignment assign_targets(std::span<const AgentState> agents, std::span<const Target> targets,
                          DistanceMetric metric, const FieldCache* fields);

enum class IslandEventKind { split, merge };

struct IslandEvent {
  IslandEventKind kind;
  int from_count;
  int to_count;
};

std::string to_string(IslandEventKind kind);

struct IslandState {
  int component_count = 0;
  std::vector<std::vector<int>> members;
  std::vector<int> majority_target;  // per component; smallest id wins ties
  std::vector<IslandEvent> events;
};

/// Component summary; a split event fires when the count grows relative to
/// `previous_count`, a merge event when it shrinks.
IslandState island_report(const SwarmGraph& graph, const Assignment& assignment,
                          std::optional<int> previous_count = std::nullopt);

}  // namespace swarmnav
