#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "swarmnav/config.hpp"
#include "swarmnav/geodesic.hpp"
#include "swarmnav/observation.hpp"
#include "swarmnav/rewards.hpp"
#include "swarmnav/sensing.hpp"
#include "swarmnav/swarm.hpp"
#include "swarmnav/world.hpp"

namespace swarmnav {

/// Everything about the learning task that is not the world itself.
struct TaskConfig {
  ObservationConfig observation;
  RewardConfig rewards;
  DistanceMetric metric = DistanceMetric::geodesic;
  int reassign_interval = 50;
  bool auto_reset = true;  // rebuild the world every episode_length steps
  std::int64_t max_voxels = 1 << 24;

  bool operator==(const TaskConfig&) const = default;
};

void to_json(nlohmann::json& j, const TaskConfig& c);
void from_json(const nlohmann::json& j, TaskConfig& c);

std::string to_string(DistanceMetric metric);
DistanceMetric metric_from_string(const std::string& name);

enum class CommandKind { move_target, add_target, remove_target, pause, resume, set_speed, reset };

std::string to_string(CommandKind kind);
CommandKind command_kind_from_string(const std::string& name);

/// External steering command. Only target commands and reset touch the world;
/// pause, resume and set_speed are handled by the session that owns the env.
struct Command {
  CommandKind kind = CommandKind::move_target;
  int target_id = -1;
  std::optional<Vec3> position;  // move_target (required), add_target (optional)
  double speed = 1.0;            // set_speed
  std::optional<std::uint64_t> seed;  // reset

  bool operator==(const Command&) const = default;
};

/// Payload fields only (no "type"/"version" envelope handling beyond "type").
void to_json(nlohmann::json& j, const Command& c);
void from_json(const nlohmann::json& j, Command& c);

struct EnvStep {
  std::vector<Event> events;
  std::vector<IslandEvent> island_events;
  RewardBreakdown rewards;
  bool episode_end = false;     // the world was rebuilt after this step
  Eigen::MatrixXd final_observation;  // observation before the rebuild, when episode_end
};

/// World plus geodesic fields, assignment, swarm graph and rewards, advanced
/// together one step at a time.
class SwarmEnv {
 public:
  SwarmEnv(EnvConfig env, TaskConfig task);

  const EnvConfig& env_config() const { return env_; }
  const TaskConfig& task_config() const { return task_; }
  const WorldState& world() const { return world_; }
  const FieldCache& fields() const { return fields_; }
  const Assignment& assignment() const { return assignment_; }
  const SwarmGraph& graph() const { return graph_; }
  const IslandState& islands() const { return islands_; }
  const SensorArray& sensors() const { return sensors_; }
  const std::vector<SensorReadings>& readings() const { return readings_; }
  const RewardBreakdown& last_rewards() const { return last_rewards_; }
  int agent_count() const { return static_cast<int>(world_.agents.size()); }
  int observation_width() const { return task_.observation.width(); }
  std::int64_t episode() const { return episode_; }
  std::int64_t episode_step() const { return world_.step; }

  /// Rebuilds the world from the configured seed (or `seed` when given).
  void reset(std::optional<std::uint64_t> seed = std::nullopt);

  /// Observation matrix, one column per agent in world order.
  Eigen::MatrixXd observe() const;
  void observe_into(Eigen::MatrixXd& out) const;

  /// Field for a target under the geodesic metric; nullptr under Euclidean.
  const DistanceField* field_for(int target_id) const;
  /// Agent-to-target distance under the task metric.
  double distance_to_target(const Vec3& p, int target_id) const;
  int tracked_target(int agent_id) const;

  EnvStep step(const std::vector<Vec3>& actions);

  /// Applies a world command at the current step boundary. Session-level
  /// commands are ignored here. Throws CommandError for invalid commands.
  std::vector<Event> apply(const Command& command);

 private:
  void refresh(bool force_reassign, std::vector<IslandEvent>* island_events);
  RewardBreakdown compute_rewards(const std::vector<Event>& events) const;

  EnvConfig env_;
  TaskConfig task_;
  WorldState world_;
  FieldCache fields_;
  SensorArray sensors_;
  std::vector<SensorReadings> readings_;
  Assignment assignment_;
  SwarmGraph graph_;
  IslandState islands_;
  RewardBreakdown last_rewards_;
  std::int64_t episode_ = 0;
  std::int64_t last_assignment_step_ = 0;
  bool targets_dirty_ = false;
};

}  // namespace swarmnav
