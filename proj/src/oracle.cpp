#include "swarmnav/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "swarmnav/log.hpp"

namespace swarmnav {

namespace {

Aabb inflate(const Aabb& b, double pad) { return {b.center, b.half_extents + Vec3{pad, pad, pad}}; }

Vec3 limit_norm(const Vec3& v, double limit) {
  const double n = v.norm();
  return n > limit ? v * (limit / n) : v;
}

}  // namespace

bool OraclePolicy::line_of_sight(const WorldState& world, const Vec3& a, const Vec3& b, double inflation) const {
  for (const auto& o : world.obstacles) {
    if (segment_hits_box(a, b, inflate(o.box, inflation))) return false;
  }
  return true;
}

bool OraclePolicy::move_is_safe(const WorldState& world, const Vec3& from, const Vec3& to) const {
  const double l = world.config.axis_length;
  const double m = config_.move_inflation;
  for (int axis = 0; axis < 3; ++axis) {
    if (to[axis] < m || to[axis] > l - m) return false;
  }
  return line_of_sight(world, from, to, m);
}

Vec3 OraclePolicy::vet_move(const WorldState& world, const Vec3& from, const Vec3& delta) const {
  if (move_is_safe(world, from, from + delta)) return delta;
  // Slide: drop one component, then two, keeping the largest remaining motion.
  static constexpr int kMasks[6][3] = {{0, 1, 1}, {1, 0, 1}, {1, 1, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  Vec3 best;
  double best_norm = 0.0;
  for (int group = 0; group < 2; ++group) {
    for (int m = group * 3; m < group * 3 + 3; ++m) {
      const Vec3 d{delta.x * kMasks[m][0], delta.y * kMasks[m][1], delta.z * kMasks[m][2]};
      const double n = d.norm();
      if (n > best_norm && move_is_safe(world, from, from + d)) {
        best = d;
        best_norm = n;
      }
    }
    if (best_norm > 0.0) return best;
  }
  return {};
}

std::vector<std::array<int, 3>> OraclePolicy::descent_chain(const DistanceField& field, const Vec3& position) const {
  const OccupancyGrid& g = *field.grid;
  std::vector<std::array<int, 3>> chain;
  auto v = g.voxel_of(position);
  double current = field.at(v[0], v[1], v[2]);
  if (current == kUnreachable) {
    // Start from the best free neighbor when the agent sits in a padded voxel.
    for (const auto& o : neighbor_offsets()) {
      const std::array<int, 3> n{v[0] + o.di, v[1] + o.dj, v[2] + o.dk};
      const double d = field.at(n[0], n[1], n[2]);
      if (d < current) {
        current = d;
        v = n;
      }
    }
    if (current == kUnreachable) return chain;
    chain.push_back(v);
  }
  for (int step = 0; step < config_.lookahead && current > 0.0; ++step) {
    std::array<int, 3> next = v;
    double best = current;
    for (const auto& o : neighbor_offsets()) {
      if (!move_is_clear(g, v[0], v[1], v[2], o)) continue;
      const double d = field.at(v[0] + o.di, v[1] + o.dj, v[2] + o.dk);
      if (d < best) {
        best = d;
        next = {v[0] + o.di, v[1] + o.dj, v[2] + o.dk};
      }
    }
    if (next == v) break;
    v = next;
    current = best;
    chain.push_back(v);
  }
  return chain;
}

Vec3 OraclePolicy::waypoint(const SwarmEnv& env, const Vec3& position, int target_id) const {
  const WorldState& world = env.world();
  const Target* target = world.find_target(target_id);
  const DistanceField* field = env.field_for(target_id);
  if (!field || line_of_sight(world, position, target->position, config_.los_inflation)) return target->position;
  const auto chain = descent_chain(*field, position);
  if (chain.empty()) return position;
  const OccupancyGrid& g = *field->grid;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    const Vec3 c = g.center((*it)[0], (*it)[1], (*it)[2]);
    if (line_of_sight(world, position, c, config_.los_inflation)) return c;
  }
  const auto& first = chain.front();
  return g.center(first[0], first[1], first[2]);
}

std::vector<Vec3> OraclePolicy::act(const SwarmEnv& env) {
  const WorldState& world = env.world();
  const EnvConfig& cfg = world.config;
  const double safe = env.task_config().observation.safe_radius;
  const double max_step = cfg.max_action;
  const bool physical = cfg.physics_mode == PhysicsMode::physical;
  std::vector<Vec3> actions(world.agents.size());

  std::vector<int> tracked(world.agents.size());
  std::vector<double> remaining(world.agents.size());
  for (std::size_t i = 0; i < world.agents.size(); ++i) {
    tracked[i] = env.tracked_target(world.agents[i].id);
    remaining[i] = env.distance_to_target(world.agents[i].position, tracked[i]);
  }

  for (std::size_t i = 0; i < world.agents.size(); ++i) {
    const AgentState& agent = world.agents[i];
    const Vec3 p = agent.position;
    const int target_id = tracked[i];

    Vec3 heading;
    if (remaining[i] == kUnreachable) {
      if (warned_.insert(target_id).second) {
        log_warning("oracle: target " + std::to_string(target_id) + " is unreachable; hovering");
      }
    } else if (remaining[i] > safe) {
      const Vec3 to = waypoint(env, p, target_id) - p;
      if (to.norm() > 0.0) heading = to.normalized();
    }

    // While travelling, an agent gives way to neighbors ahead of it on the
    // way to the same target and ignores those behind, so queues drain in
    // order instead of jamming. Hovering agents push each other evenly.
    const bool travelling = remaining[i] > safe && remaining[i] != kUnreachable;
    Vec3 repulsion;
    for (std::size_t j = 0; j < world.agents.size(); ++j) {
      const AgentState& other = world.agents[j];
      if (j == i || !other.alive) continue;
      const Vec3 away = p - other.position;
      const double d = away.norm();
      if (d >= safe) continue;
      double gain = config_.repulsion_gain;
      if (travelling && tracked[j] == target_id) {
        const bool ahead = remaining[j] < remaining[i] || (remaining[j] == remaining[i] && other.id < agent.id);
        if (!ahead) continue;
        gain = config_.yield_gain;
      }
      // Coincident agents separate along a fixed, id-ordered axis.
      const Vec3 dir = d > 0.0 ? away / d : Vec3{agent.id < other.id ? -1.0 : 1.0, 0.0, 0.0};
      repulsion += dir * (gain * (safe - d) / safe);
    }

    if (!physical) {
      const Vec3 delta = limit_norm(heading * max_step + repulsion * max_step, max_step);
      actions[i] = vet_move(world, p, clamp_components(delta, max_step));
      continue;
    }

    // Physical mode: choose a velocity, vet the stopping path, then solve the
    // damped update for the control that reaches it in one step.
    const double dt = cfg.dt;
    const double damping = std::max(1e-9, 1.0 - cfg.linear_drag * dt);
    double speed = config_.cruise_speed;
    if (travelling) {
      speed = std::min(speed, std::sqrt(2.0 * config_.braking * (remaining[i] - safe)));
    }
    Vec3 v_des = limit_norm(heading * speed + repulsion * config_.cruise_speed, config_.cruise_speed);
    const double v_norm = v_des.norm();
    if (v_norm > 0.0) {
      const double reach = v_norm * dt + v_norm * v_norm / (2.0 * config_.braking);
      const Vec3 probe = vet_move(world, p, v_des * (reach / v_norm));
      v_des = probe * (v_norm / reach);
    }
    const Vec3 gravity_step{0.0, 0.0, -cfg.gravity * dt};
    Vec3 u = v_des / damping - agent.velocity - gravity_step;
    u = clamp_components(u, max_step);
    const AgentState next = apply_action(agent, u, cfg);
    if (!move_is_safe(world, p, next.position)) {
      // Brake as hard as possible.
      u = clamp_components(-agent.velocity - gravity_step, max_step);
    }
    actions[i] = u;
  }
  return actions;
}

}  // namespace swarmnav
