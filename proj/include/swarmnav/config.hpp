#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmnav/vec3.hpp"

namespace swarmnav {

enum class PhysicsMode { kinematic, physical };
enum class Placement { random, static_listed };

/// Static or dynamic motion; max_speed is in units per step.
struct Motion {
  bool dynamic = false;
  double max_speed = 0.0;

  bool operator==(const Motion&) const = default;
};

struct ObstacleSpec {
  Vec3 center;
  Vec3 half_extents;

  bool operator==(const ObstacleSpec&) const = default;
};

struct EnvConfig {
  double axis_length = 20.0;
  int obstacle_count = 0;
  double obstacle_size_min = 1.0;
  double obstacle_size_max = 1.0;
  Placement obstacle_placement = Placement::random;
  std::vector<ObstacleSpec> obstacles;  // used when placement is static_listed
  Motion obstacle_motion;
  int target_count = 1;
  std::vector<Vec3> target_positions;  // optional explicit initial targets
  Motion target_motion;
  int agent_count = 23;
  std::optional<Aabb> agent_spawn_region;
  PhysicsMode physics_mode = PhysicsMode::kinematic;
  double gravity = 9.81;
  double linear_drag = 0.25;
  double angular_drag = 0.15;  // stored only; rotation is locked
  double dt = 0.02;
  int episode_length = 900;
  std::uint64_t seed = 0;

  double max_action = 0.5;       // per-component delta clamp, units per step
  double spawn_clearance = 1.0;  // used for agent/target placement and respawn
  double voxel_size = 1.0;       // placement lattice and geodesic grid
  bool random_tick = true;
  double tick_threshold = 0.85;
  int ticks_per_relocation = 100;

  bool operator==(const EnvConfig&) const = default;
};

/// Throws ConfigError when an invariant is violated.
void validate(const EnvConfig& config);

void to_json(nlohmann::json& j, const Vec3& v);
void from_json(const nlohmann::json& j, Vec3& v);
void to_json(nlohmann::json& j, const EnvConfig& c);
void from_json(const nlohmann::json& j, EnvConfig& c);

EnvConfig load_env_config(const std::string& path);
void save_env_config(const EnvConfig& config, const std::string& path);

namespace presets {

/// Single-target environments, rows 1..3.
EnvConfig single_target(int row);
/// Multi-target environments, rows 1..6.
EnvConfig multi_target(int row);
/// Heavier drag variant used for the complex-environment experiment.
EnvConfig complex_environment();

}  // namespace presets

}  // namespace swarmnav
