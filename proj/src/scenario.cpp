#include "swarmnav/scenario.hpp"

#include <algorithm>
#include <fstream>

#include "swarmnav/error.hpp"

namespace swarmnav {

using nlohmann::json;

namespace {

json box_to_json(const Aabb& b) { return json{{"center", b.center}, {"half_extents", b.half_extents}}; }

Aabb box_from_json(const json& j) { return {j.at("center").get<Vec3>(), j.at("half_extents").get<Vec3>()}; }

const char* const kKinds[] = {"reach",    "formation",    "avoid",    "single_file",
                              "one_swarm", "island_cycle", "tracking", "stable_flight"};

}  // namespace

std::string success_label(const std::string& kind) {
  if (kind == "reach") return "reached";
  if (kind == "formation") return "formed";
  if (kind == "avoid") return "avoided";
  if (kind == "single_file") return "single_file";
  if (kind == "one_swarm") return "one_swarm";
  if (kind == "island_cycle") return "split_merge";
  if (kind == "tracking") return "tracking";
  if (kind == "stable_flight") return "stable_flight";
  throw ConfigError("unknown predicate kind '" + kind + "'");
}

void to_json(json& j, const ScheduledCommand& c) { j = json{{"step", c.step}, {"command", c.command}}; }

void from_json(const json& j, ScheduledCommand& c) {
  c.step = j.at("step").get<std::int64_t>();
  c.command = j.at("command").get<Command>();
}

void to_json(json& j, const Predicate& p) {
  j = json{{"kind", p.kind},
           {"expect", p.expect},
           {"window", p.window},
           {"fraction", p.fraction},
           {"stall_tolerance", p.stall_tolerance}};
  if (p.region) j["region"] = box_to_json(*p.region);
}

void from_json(const json& j, Predicate& p) {
  Predicate d;
  d.kind = j.value("kind", d.kind);
  bool known = false;
  for (const char* k : kKinds) known = known || d.kind == k;
  if (!known) throw ConfigError("unknown predicate kind '" + d.kind + "'");
  d.expect = j.value("expect", success_label(d.kind));
  d.window = j.value("window", d.window);
  d.fraction = j.value("fraction", d.fraction);
  d.stall_tolerance = j.value("stall_tolerance", d.stall_tolerance);
  if (j.contains("region")) d.region = box_from_json(j.at("region"));
  if (d.window < 1) throw ConfigError("predicate window must be positive");
  if (!(d.stall_tolerance >= 0.0)) throw ConfigError("predicate stall_tolerance must be >= 0");
  if (d.kind == "single_file" && !d.region) throw ConfigError("single_file predicate needs a region");
  p = d;
}

void Scenario::validate() const {
  swarmnav::validate(env);
  if (duration < 1) throw ConfigError("scenario duration must be at least 1");
  for (const auto& c : script) {
    if (c.step < 0 || c.step >= duration) throw ConfigError("scripted command outside the scenario duration");
    if (c.command.kind == CommandKind::move_target || c.command.kind == CommandKind::remove_target) {
      if (c.command.target_id < 0) throw ConfigError("scripted command needs a target id");
    }
  }
  for (std::size_t i = 1; i < script.size(); ++i) {
    if (script[i].step < script[i - 1].step) throw ConfigError("scripted commands must be ordered by step");
  }
  // Target ids referenced by the script must exist when the command runs.
  int next_id = env.target_count;
  std::vector<int> live;
  for (int i = 0; i < env.target_count; ++i) live.push_back(i);
  for (const auto& c : script) {
    const auto& cmd = c.command;
    if (cmd.kind == CommandKind::add_target) live.push_back(next_id++);
    if (cmd.kind == CommandKind::move_target || cmd.kind == CommandKind::remove_target) {
      auto it = std::find(live.begin(), live.end(), cmd.target_id);
      if (it == live.end()) {
        throw ConfigError("scripted command at step " + std::to_string(c.step) + " refers to unknown target " +
                          std::to_string(cmd.target_id));
      }
      if (cmd.kind == CommandKind::remove_target) live.erase(it);
    }
  }
}

void to_json(json& j, const Scenario& s) {
  j = json{{"name", s.name},       {"description", s.description}, {"env", s.env},
           {"task", s.task},       {"duration", s.duration},       {"script", s.script},
           {"predicate", s.predicate}};
}

void from_json(const json& j, Scenario& s) {
  Scenario d;
  d.name = j.value("name", std::string("unnamed"));
  d.description = j.value("description", std::string());
  d.env = j.at("env").get<EnvConfig>();
  if (j.contains("task")) d.task = j.at("task").get<TaskConfig>();
  d.duration = j.value("duration", static_cast<std::int64_t>(d.env.episode_length));
  if (j.contains("script")) d.script = j.at("script").get<std::vector<ScheduledCommand>>();
  if (j.contains("predicate")) d.predicate = j.at("predicate").get<Predicate>();
  if (d.predicate.expect.empty()) d.predicate.expect = success_label(d.predicate.kind);
  d.validate();
  s = d;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("scenario " + path + " is not valid JSON: " + e.what());
  }
  try {
    return j.get<Scenario>();
  } catch (const json::exception& e) {
    throw ConfigError("scenario " + path + ": " + e.what());
  }
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write scenario file " + path);
  out << json(scenario).dump(2) << '\n';
}

}  // namespace swarmnav
