#include "swarmnav/env.hpp"

#include <algorithm>
#include <span>

#include "swarmnav/error.hpp"
#include "swarmnav/log.hpp"

namespace swarmnav {

using nlohmann::json;

std::string to_string(DistanceMetric metric) {
  return metric == DistanceMetric::geodesic ? "geodesic" : "euclidean";
}

DistanceMetric metric_from_string(const std::string& name) {
  if (name == "geodesic") return DistanceMetric::geodesic;
  if (name == "euclidean") return DistanceMetric::euclidean;
  throw ConfigError("unknown distance metric '" + name + "'");
}

void to_json(json& j, const TaskConfig& c) {
  const auto& o = c.observation;
  j = json{{"bins_per_axis", o.bins_per_axis},
           {"comm_radius", o.comm_radius},
           {"safe_radius", o.safe_radius},
           {"sensor_count", o.sensor_count},
           {"sensor_range", o.sensor_range},
           {"metric", to_string(c.metric)},
           {"punishment", c.rewards.punishment},
           {"r_ms_weight", c.rewards.r_ms_weight},
           {"reassign_interval", c.reassign_interval},
           {"auto_reset", c.auto_reset},
           {"max_voxels", c.max_voxels}};
}

void from_json(const json& j, TaskConfig& c) {
  TaskConfig d;
  auto& o = d.observation;
  o.bins_per_axis = j.value("bins_per_axis", o.bins_per_axis);
  o.comm_radius = j.value("comm_radius", o.comm_radius);
  o.safe_radius = j.value("safe_radius", o.safe_radius);
  o.sensor_count = j.value("sensor_count", o.sensor_count);
  o.sensor_range = j.value("sensor_range", o.sensor_range);
  d.metric = metric_from_string(j.value("metric", std::string("geodesic")));
  d.rewards.comm_radius = o.comm_radius;
  d.rewards.safe_radius = o.safe_radius;
  d.rewards.punishment = j.value("punishment", d.rewards.punishment);
  d.rewards.r_ms_weight = j.value("r_ms_weight", d.rewards.r_ms_weight);
  d.reassign_interval = j.value("reassign_interval", d.reassign_interval);
  d.auto_reset = j.value("auto_reset", d.auto_reset);
  d.max_voxels = j.value("max_voxels", d.max_voxels);
  if (o.bins_per_axis < 1 || o.sensor_count < 1 || !(o.safe_radius < o.comm_radius) || !(o.sensor_range > 0.0) ||
      d.reassign_interval < 1) {
    throw ConfigError("invalid task configuration");
  }
  c = d;
}

std::string to_string(CommandKind kind) {
  switch (kind) {
    case CommandKind::move_target: return "move_target";
    case CommandKind::add_target: return "add_target";
    case CommandKind::remove_target: return "remove_target";
    case CommandKind::pause: return "pause";
    case CommandKind::resume: return "resume";
    case CommandKind::set_speed: return "set_speed";
    case CommandKind::reset: return "reset";
  }
  return "unknown";
}

CommandKind command_kind_from_string(const std::string& name) {
  for (auto k : {CommandKind::move_target, CommandKind::add_target, CommandKind::remove_target, CommandKind::pause,
                 CommandKind::resume, CommandKind::set_speed, CommandKind::reset}) {
    if (to_string(k) == name) return k;
  }
  throw CommandError("unknown command type '" + name + "'");
}

void to_json(json& j, const Command& c) {
  j = json{{"type", to_string(c.kind)}};
  switch (c.kind) {
    case CommandKind::move_target:
      j["id"] = c.target_id;
      j["pos"] = *c.position;
      break;
    case CommandKind::add_target:
      if (c.position) j["pos"] = *c.position;
      break;
    case CommandKind::remove_target:
      j["id"] = c.target_id;
      break;
    case CommandKind::set_speed:
      j["speed"] = c.speed;
      break;
    case CommandKind::reset:
      if (c.seed) j["seed"] = *c.seed;
      break;
    default:
      break;
  }
}

void from_json(const json& j, Command& c) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    throw CommandError("command must be an object with a string 'type'");
  }
  Command out;
  out.kind = command_kind_from_string(j["type"].get<std::string>());
  auto need_id = [&] {
    if (!j.contains("id") || !j["id"].is_number_integer()) throw CommandError(to_string(out.kind) + " needs an integer 'id'");
    out.target_id = j["id"].get<int>();
  };
  auto read_pos = [&] {
    const auto& p = j.at("pos");
    if (!p.is_array() || p.size() != 3 || !std::all_of(p.begin(), p.end(), [](const json& v) { return v.is_number(); })) {
      throw CommandError("'pos' must be an array of three numbers");
    }
    const Vec3 v = p.get<Vec3>();
    if (!v.finite()) throw CommandError("'pos' must be finite");
    out.position = v;
  };
  switch (out.kind) {
    case CommandKind::move_target:
      need_id();
      if (!j.contains("pos")) throw CommandError("move_target needs 'pos'");
      read_pos();
      break;
    case CommandKind::add_target:
      if (j.contains("pos")) read_pos();
      break;
    case CommandKind::remove_target:
      need_id();
      break;
    case CommandKind::set_speed:
      if (!j.contains("speed") || !j["speed"].is_number()) throw CommandError("set_speed needs a numeric 'speed'");
      out.speed = j["speed"].get<double>();
      if (!(out.speed > 0.0) || !std::isfinite(out.speed)) throw CommandError("speed must be positive");
      break;
    case CommandKind::reset:
      if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw CommandError("'seed' must be a non-negative integer");
        out.seed = j["seed"].get<std::uint64_t>();
      }
      break;
    default:
      break;
  }
  c = out;
}

SwarmEnv::SwarmEnv(EnvConfig env, TaskConfig task)
    : env_(std::move(env)),
      task_(task),
      fields_(env_.voxel_size, task.max_voxels),
      sensors_(SensorArray::standard(task.observation.sensor_count, task.observation.sensor_range)) {
  task_.rewards.safe_radius = task_.observation.safe_radius;
  task_.rewards.comm_radius = task_.observation.comm_radius;
  reset();
}

void SwarmEnv::reset(std::optional<std::uint64_t> seed) {
  EnvConfig cfg = env_;
  if (seed) cfg.seed = *seed;
  world_ = build_world(cfg);
  fields_ = FieldCache(env_.voxel_size, task_.max_voxels);
  last_assignment_step_ = 0;
  islands_ = IslandState{};
  last_rewards_ = RewardBreakdown{};
  refresh(true, nullptr);
}

const DistanceField* SwarmEnv::field_for(int target_id) const {
  return task_.metric == DistanceMetric::geodesic ? fields_.field(target_id) : nullptr;
}

double SwarmEnv::distance_to_target(const Vec3& p, int target_id) const {
  const Target* t = world_.find_target(target_id);
  if (!t) throw ContractError("unknown target " + std::to_string(target_id));
  return target_distance(task_.metric, task_.metric == DistanceMetric::geodesic ? &fields_ : nullptr, *t, p);
}

int SwarmEnv::tracked_target(int agent_id) const {
  auto it = assignment_.tracked_target.find(agent_id);
  if (it == assignment_.tracked_target.end()) throw ContractError("agent has no assigned target");
  return it->second;
}

void SwarmEnv::refresh(bool force_reassign, std::vector<IslandEvent>* island_events) {
  if (task_.metric == DistanceMetric::geodesic) fields_.update(world_);
  const bool due = world_.step - last_assignment_step_ >= task_.reassign_interval;
  if (force_reassign || targets_dirty_ || due) {
    const FieldCache* f = task_.metric == DistanceMetric::geodesic ? &fields_ : nullptr;
    assignment_ = assign_targets(world_.agents, world_.targets, task_.metric, f);
    last_assignment_step_ = world_.step;
    targets_dirty_ = false;
    if (!assignment_.untracked_targets.empty()) {
      log_warning(std::to_string(assignment_.untracked_targets.size()) +
                  " target(s) left untracked: more targets than agents");
    }
  }
  graph_ = build_graph(world_.agents, task_.observation.comm_radius);
  const std::optional<int> previous =
      islands_.component_count > 0 ? std::optional<int>(islands_.component_count) : std::nullopt;
  islands_ = island_report(graph_, assignment_, island_events ? previous : std::nullopt);
  if (island_events) *island_events = islands_.events;
  readings_.clear();
  readings_.reserve(world_.agents.size());
  for (const auto& a : world_.agents) readings_.push_back(sense(a.position, world_, sensors_));
}

Eigen::MatrixXd SwarmEnv::observe() const {
  Eigen::MatrixXd out;
  observe_into(out);
  return out;
}

void SwarmEnv::observe_into(Eigen::MatrixXd& out) const {
  const int width = task_.observation.width();
  out.resize(width, static_cast<Eigen::Index>(world_.agents.size()));
  for (std::size_t i = 0; i < world_.agents.size(); ++i) {
    const auto& a = world_.agents[i];
    const int target = tracked_target(a.id);
    std::span<double> col(out.col(static_cast<Eigen::Index>(i)).data(), static_cast<std::size_t>(width));
    assemble_into(col, a, world_, target, field_for(target), task_.observation, readings_[i]);
  }
}

RewardBreakdown SwarmEnv::compute_rewards(const std::vector<Event>& events) const {
  const std::size_t n = world_.agents.size();
  std::vector<int> ids(n);
  std::vector<double> r_n(n), r_o(n), r_s(n), punishment(n, 0.0);
  std::vector<Vec3> positions(n);
  for (std::size_t i = 0; i < n; ++i) positions[i] = world_.agents[i].position;
  std::vector<Vec3> neighbors;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = world_.agents[i];
    ids[i] = a.id;
    r_n[i] = navigation_reward(distance_to_target(a.position, tracked_target(a.id)), task_.rewards.safe_radius);
    neighbors.clear();
    for (std::size_t k = 0; k < n; ++k) {
      if (k != i && world_.agents[k].alive) neighbors.push_back(positions[k]);
    }
    r_o[i] = organization_reward(a.position, neighbors, task_.rewards.safe_radius, task_.rewards.comm_radius);
    r_s[i] = safety_reward(readings_[i]);
  }
  for (const auto& e : events) {
    if (e.kind != EventKind::destroyed) continue;
    for (std::size_t i = 0; i < n; ++i) {
      if (ids[i] == e.id) punishment[i] += task_.rewards.punishment;
    }
  }
  return combine_rewards(ids, std::move(r_n), std::move(r_o), std::move(r_s), std::move(punishment),
                         graph_.components, task_.rewards.r_ms_weight);
}

EnvStep SwarmEnv::step(const std::vector<Vec3>& actions) {
  EnvStep out;
  out.events = swarmnav::step(world_, actions).events;
  for (const auto& e : out.events) {
    if (e.kind == EventKind::targets_relocated) targets_dirty_ = true;
  }
  refresh(false, &out.island_events);
  out.rewards = compute_rewards(out.events);
  last_rewards_ = out.rewards;
  if (task_.auto_reset && world_.step >= env_.episode_length) {
    out.episode_end = true;
    observe_into(out.final_observation);
    ++episode_;
    const std::uint64_t next_seed = world_.rng.next_u64();
    reset(next_seed);
  }
  return out;
}

std::vector<Event> SwarmEnv::apply(const Command& c) {
  std::vector<Event> events;
  auto checked_position = [&](const Vec3& p) {
    const double l = world_.config.axis_length;
    const Vec3 q{std::clamp(p.x, 0.0, l), std::clamp(p.y, 0.0, l), std::clamp(p.z, 0.0, l)};
    for (const auto& o : world_.obstacles) {
      if (o.box.contains(q)) throw CommandError("target position lies inside an obstacle");
    }
    return q;
  };
  switch (c.kind) {
    case CommandKind::move_target: {
      Target* t = world_.find_target(c.target_id);
      if (!t) throw CommandError("no target with id " + std::to_string(c.target_id));
      if (!c.position) throw CommandError("move_target needs a position");
      t->position = checked_position(*c.position);
      events.push_back({EventKind::target_moved, t->id, {}});
      break;
    }
    case CommandKind::add_target: {
      Target t;
      t.id = world_.next_target_id;
      if (c.position) {
        t.position = checked_position(*c.position);
      } else {
        t.position = randomize_position(world_, PlacementQuery{world_.config.spawn_clearance, std::nullopt, -1, -1});
      }
      ++world_.next_target_id;
      world_.targets.push_back(t);
      targets_dirty_ = true;
      events.push_back({EventKind::target_added, t.id, {}});
      break;
    }
    case CommandKind::remove_target: {
      auto it = std::find_if(world_.targets.begin(), world_.targets.end(),
                             [&](const Target& t) { return t.id == c.target_id; });
      if (it == world_.targets.end()) throw CommandError("no target with id " + std::to_string(c.target_id));
      if (world_.targets.size() == 1) throw CommandError("cannot remove the last target");
      world_.targets.erase(it);
      targets_dirty_ = true;
      events.push_back({EventKind::target_removed, c.target_id, {}});
      break;
    }
    case CommandKind::reset:
      reset(c.seed);
      return events;
    default:
      return events;
  }
  refresh(false, nullptr);
  return events;
}

}  // namespace swarmnav
