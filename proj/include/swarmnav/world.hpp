#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swarmnav/config.hpp"
#include "swarmnav/rng.hpp"
#include "swarmnav/vec3.hpp"

namespace swarmnav {

struct Obstacle {
  int id = 0;
  Aabb box;
  Vec3 velocity;  // units per step; zero when static
};

struct Target {
  int id = 0;
  Vec3 position;
  Vec3 velocity;  // units per step
};

struct AgentState {
  int id = 0;
  Vec3 position;
  Vec3 velocity;
  bool alive = true;
};

/// Complete simulation state. Two states built from the same config and driven
/// by the same actions and commands stay bit-identical.
struct WorldState {
  EnvConfig config;
  std::vector<AgentState> agents;
  std::vector<Obstacle> obstacles;
  std::vector<Target> targets;
  std::int64_t step = 0;
  int tick_count = 0;
  int next_target_id = 0;
  Rng rng;

  const Target* find_target(int id) const;
  Target* find_target(int id);
};

enum class EventKind {
  destroyed,
  respawned,
  targets_relocated,
  target_added,
  target_removed,
  target_moved,
};

std::string to_string(EventKind kind);

struct Event {
  EventKind kind;
  int id = -1;  // agent or target id; -1 for world-wide events
  std::string detail;

  bool operator==(const Event&) const = default;
};

struct StepOutcome {
  std::vector<Event> events;
};

/// Places obstacles, targets and agents. Throws PlacementError when the arena
/// is too crowded and ConfigError for an invalid config.
WorldState build_world(const EnvConfig& config);

/// Filters applied by randomize_position.
struct PlacementQuery {
  double clearance = 0.0;
  std::optional<Aabb> region;   // restrict candidates to this box
  int ignore_agent = -1;        // agent being respawned
  int ignore_target = -1;       // target being relocated
};

/// Random free lattice point (voxel center) at least `clearance` from every
/// obstacle surface, living agent and target. Tries 10,000 random cells, then
/// falls back to enumerating every cell. Throws PlacementError if none is free.
Vec3 randomize_position(WorldState& state, double clearance);
Vec3 randomize_position(WorldState& state, const PlacementQuery& query);

/// True if `p` satisfies the placement rules of `query` in `state`.
bool is_free_position(const WorldState& state, const Vec3& p, const PlacementQuery& query);

bool inside_arena(const EnvConfig& config, const Vec3& p);

/// Integrates one action for one agent. Rotation is never integrated.
AgentState apply_action(const AgentState& agent, const Vec3& u, const EnvConfig& config);

/// Feeds one uniform draw into the random tick counter. Returns true when the
/// counter wrapped and targets must be relocated.
bool advance_random_tick(WorldState& state, double draw);

/// True when the segment a->b touches the closed box.
bool segment_hits_box(const Vec3& a, const Vec3& b, const Aabb& box);

/// Advances the world by one step. `actions` holds one delta per agent.
StepOutcome step(WorldState& state, std::span<const Vec3> actions);

}  // namespace swarmnav
