#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmnav/config.hpp"
#include "swarmnav/env.hpp"

namespace swarmnav {

/// A command applied right before the given step is simulated.
struct ScheduledCommand {
  std::int64_t step = 0;
  Command command;

  bool operator==(const ScheduledCommand&) const = default;
};

/// Success predicate evaluated over a finished run.
///
/// kinds:
///   reach        all agents within D_c of their target at some step ("reached"),
///                otherwise "stalled" when the closest approach improved by no
///                more than `stall_tolerance` during the final `window` steps,
///                otherwise "moving"
///   formation    "formed" when every agent has an in-band neighbor for at least
///                `fraction` of the final `window` steps and all track at the end
///   avoid        "avoided" when nothing was destroyed and the swarm reached
///   single_file  "single_file" when at most one agent is inside `region` at any
///                step and the swarm reached
///   one_swarm    "one_swarm" when the final component count is 1 and all track
///   island_cycle "split_merge" when the component counts show 1 -> 2 and later
///                2 -> 1 and the settled split has sizes differing by at most 1
///   tracking     "tracking" when the tracking fraction over the final `window`
///                steps is at least `fraction`
///   stable_flight "stable_flight" when nothing was destroyed and the swarm reached
struct Predicate {
  std::string kind = "reach";
  std::string expect;  // label that counts as success; defaults per kind
  int window = 200;
  double fraction = 0.8;
  double stall_tolerance = 1e-3;  // units
  std::optional<Aabb> region;

  bool operator==(const Predicate&) const = default;
};

struct Scenario {
  std::string name;
  std::string description;
  EnvConfig env;
  TaskConfig task;
  std::int64_t duration = 900;
  std::vector<ScheduledCommand> script;
  Predicate predicate;

  void validate() const;
  bool operator==(const Scenario&) const = default;
};

void to_json(nlohmann::json& j, const ScheduledCommand& c);
void from_json(const nlohmann::json& j, ScheduledCommand& c);
void to_json(nlohmann::json& j, const Predicate& p);
void from_json(const nlohmann::json& j, Predicate& p);
void to_json(nlohmann::json& j, const Scenario& s);
void from_json(const nlohmann::json& j, Scenario& s);

Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, const std::string& path);

/// Label a predicate kind reports on success.
std::string success_label(const std::string& kind);

}  // namespace swarmnav
