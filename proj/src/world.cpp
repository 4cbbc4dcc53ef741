#include "swarmnav/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "swarmnav/error.hpp"

namespace swarmnav {

namespace {

constexpr int kPlacementAttempts = 10000;

Vec3 random_direction(Rng& rng) {
  // Normalized Gaussian triple: uniform on the unit sphere.
  for (;;) {
    const Vec3 v{rng.normal(), rng.normal(), rng.normal()};
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

Vec3 random_velocity(Rng& rng, const Motion& motion) {
  if (!motion.dynamic) return {};
  return random_direction(rng) * (motion.max_speed * rng.uniform(0.5, 1.0));
}

Aabb arena_box(const EnvConfig& c) {
  const double h = c.axis_length / 2.0;
  return {{h, h, h}, {h, h, h}};
}

// Keeps [lo, hi] of a moving interval inside [0, L], flipping velocity on contact.
void reflect_interval(double& center, double half, double& velocity, double length) {
  if (center - half < 0.0) {
    center = std::min(half + (half - center), length - half);
    velocity = std::abs(velocity);
  } else if (center + half > length) {
    center = std::max(length - half - (center + half - length), half);
    velocity = -std::abs(velocity);
  }
}

void move_obstacles(WorldState& s) {
  const double length = s.config.axis_length;
  for (auto& o : s.obstacles) {
    if (o.velocity == Vec3{}) continue;
    Aabb moved = o.box;
    Vec3 v = o.velocity;
    moved.center += v;
    for (int a = 0; a < 3; ++a) reflect_interval(moved.center[a], moved.half_extents[a], v[a], length);
    const bool swallows_target = std::any_of(s.targets.begin(), s.targets.end(),
                                             [&](const Target& t) { return moved.contains(t.position); });
    if (swallows_target) {
      o.velocity = -o.velocity;
      continue;
    }
    o.box = moved;
    o.velocity = v;
  }
}

bool inside_any_obstacle(const WorldState& s, const Vec3& p) {
  return std::any_of(s.obstacles.begin(), s.obstacles.end(), [&](const Obstacle& o) { return o.box.contains(p); });
}

void move_targets(WorldState& s) {
  const double length = s.config.axis_length;
  for (auto& t : s.targets) {
    if (t.velocity == Vec3{}) continue;
    Vec3 p = t.position + t.velocity;
    Vec3 v = t.velocity;
    for (int a = 0; a < 3; ++a) reflect_interval(p[a], 0.0, v[a], length);
    if (inside_any_obstacle(s, p)) {
      t.velocity = -t.velocity;
      continue;
    }
    t.position = p;
    t.velocity = v;
  }
}

struct Lattice {
  Vec3 origin;
  int n[3] = {1, 1, 1};
  double cell = 1.0;

  std::int64_t size() const { return static_cast<std::int64_t>(n[0]) * n[1] * n[2]; }
  Vec3 center(std::int64_t index) const {
    const std::int64_t i = index % n[0];
    const std::int64_t j = (index / n[0]) % n[1];
    const std::int64_t k = index / (static_cast<std::int64_t>(n[0]) * n[1]);
    return origin + Vec3{(static_cast<double>(i) + 0.5) * cell, (static_cast<double>(j) + 0.5) * cell,
                         (static_cast<double>(k) + 0.5) * cell};
  }
};

Lattice make_lattice(const EnvConfig& c, const std::optional<Aabb>& region) {
  Lattice lat;
  lat.cell = c.voxel_size;
  const Aabb arena = arena_box(c);
  Vec3 lo = arena.lo();
  Vec3 hi = arena.hi();
  if (region) {
    lo = max_components(lo, region->lo());
    hi = min_components(hi, region->hi());
  }
  lat.origin = lo;
  for (int a = 0; a < 3; ++a) {
    const double extent = hi[a] - lo[a];
    lat.n[a] = extent > 0.0 ? std::max(1, static_cast<int>(std::floor(extent / lat.cell + 1e-9))) : 0;
    if (lat.n[a] > 0 && lat.n[a] * lat.cell > extent + 1e-9) {
      // Region narrower than one cell: single candidate at the region center.
      lat.origin[a] = lo[a] + extent / 2.0 - lat.cell / 2.0;
    }
  }
  return lat;
}

void place_random_obstacles(WorldState& s) {
  const EnvConfig& c = s.config;
  for (int i = 0; i < c.obstacle_count; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      const double edge = s.rng.uniform(c.obstacle_size_min, c.obstacle_size_max);
      const double h = edge / 2.0;
      const Aabb box{{s.rng.uniform(h, c.axis_length - h), s.rng.uniform(h, c.axis_length - h),
                      s.rng.uniform(h, c.axis_length - h)},
                     {h, h, h}};
      const bool clash = std::any_of(s.obstacles.begin(), s.obstacles.end(),
                                     [&](const Obstacle& o) { return o.box.overlaps(box); });
      if (!clash) {
        s.obstacles.push_back({i, box, {}});
        placed = true;
      }
    }
    if (!placed) {
      throw PlacementError("arena too crowded: placed " + std::to_string(i) + " of " +
                           std::to_string(c.obstacle_count) + " obstacles after " +
                           std::to_string(kPlacementAttempts) + " attempts");
    }
  }
}

}  // namespace

const Target* WorldState::find_target(int id) const {
  auto it = std::find_if(targets.begin(), targets.end(), [id](const Target& t) { return t.id == id; });
  return it == targets.end() ? nullptr : &*it;
}

Target* WorldState::find_target(int id) {
  return const_cast<Target*>(static_cast<const WorldState*>(this)->find_target(id));
}

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::destroyed: return "destroyed";
    case EventKind::respawned: return "respawned";
    case EventKind::targets_relocated: return "targets_relocated";
    case EventKind::target_added: return "target_added";
    case EventKind::target_removed: return "target_removed";
    case EventKind::target_moved: return "target_moved";
  }
  return "unknown";
}

bool inside_arena(const EnvConfig& config, const Vec3& p) {
  const double l = config.axis_length;
  return p.x >= 0.0 && p.x <= l && p.y >= 0.0 && p.y <= l && p.z >= 0.0 && p.z <= l;
}

bool is_free_position(const WorldState& s, const Vec3& p, const PlacementQuery& q) {
  if (!inside_arena(s.config, p)) return false;
  if (q.region && !q.region->contains(p)) return false;
  for (const auto& o : s.obstacles) {
    if (o.box.contains(p)) return false;
    if (o.box.distance_to(p) < q.clearance) return false;
  }
  auto too_close = [&](const Vec3& other) {
    const double d = distance(p, other);
    return d == 0.0 || d < q.clearance;
  };
  for (const auto& a : s.agents) {
    if (a.alive && a.id != q.ignore_agent && too_close(a.position)) return false;
  }
  for (const auto& t : s.targets) {
    if (t.id != q.ignore_target && too_close(t.position)) return false;
  }
  return true;
}

Vec3 randomize_position(WorldState& state, double clearance) {
  return randomize_position(state, PlacementQuery{clearance, std::nullopt, -1, -1});
}

Vec3 randomize_position(WorldState& state, const PlacementQuery& query) {
  if (!(query.clearance >= 0.0)) throw ContractError("clearance must be >= 0");
  const Lattice lat = make_lattice(state.config, query.region);
  const std::int64_t cells = lat.size();
  if (cells <= 0) throw PlacementError("placement region is empty");
  for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
    const Vec3 p = lat.center(static_cast<std::int64_t>(state.rng.below(static_cast<std::uint64_t>(cells))));
    if (is_free_position(state, p, query)) return p;
  }
  std::vector<std::int64_t> free_cells;
  for (std::int64_t i = 0; i < cells; ++i) {
    if (is_free_position(state, lat.center(i), query)) free_cells.push_back(i);
  }
  if (free_cells.empty()) throw PlacementError("no free position satisfies the requested clearance");
  return lat.center(free_cells[state.rng.below(free_cells.size())]);
}

WorldState build_world(const EnvConfig& config) {
  validate(config);
  WorldState s;
  s.config = config;
  s.rng = Rng(config.seed);

  if (config.obstacle_placement == Placement::static_listed) {
    int id = 0;
    for (const auto& spec : config.obstacles) s.obstacles.push_back({id++, {spec.center, spec.half_extents}, {}});
  } else {
    place_random_obstacles(s);
  }
  for (auto& o : s.obstacles) o.velocity = random_velocity(s.rng, config.obstacle_motion);

  for (int i = 0; i < config.target_count; ++i) {
    Target t;
    t.id = s.next_target_id++;
    if (!config.target_positions.empty()) {
      t.position = config.target_positions[i];
      if (!inside_arena(config, t.position) || inside_any_obstacle(s, t.position)) {
        throw ConfigError("listed target position is outside the arena or inside an obstacle");
      }
    } else {
      PlacementQuery q{config.spawn_clearance, std::nullopt, -1, -1};
      t.position = randomize_position(s, q);
    }
    t.velocity = random_velocity(s.rng, config.target_motion);
    s.targets.push_back(t);
  }

  for (int i = 0; i < config.agent_count; ++i) {
    AgentState a;
    a.id = i;
    PlacementQuery q{config.spawn_clearance, config.agent_spawn_region, -1, -1};
    a.position = randomize_position(s, q);
    s.agents.push_back(a);
  }
  return s;
}

AgentState apply_action(const AgentState& agent, const Vec3& u, const EnvConfig& config) {
  AgentState next = agent;
  const Vec3 du = clamp_components(u, config.max_action);
  if (config.physics_mode == PhysicsMode::kinematic) {
    next.position = agent.position + du;
    next.velocity = du;
    return next;
  }
  const Vec3 gravity{0.0, 0.0, -config.gravity};
  const double damping = std::max(0.0, 1.0 - config.linear_drag * config.dt);
  next.velocity = (agent.velocity + (du / config.dt + gravity) * config.dt) * damping;
  next.position = agent.position + next.velocity * config.dt;
  return next;
}

bool advance_random_tick(WorldState& state, double draw) {
  if (draw < state.config.tick_threshold) return false;
  if (++state.tick_count < state.config.ticks_per_relocation) return false;
  state.tick_count = 0;
  return true;
}

bool segment_hits_box(const Vec3& a, const Vec3& b, const Aabb& box) {
  const Vec3 lo = box.lo();
  const Vec3 hi = box.hi();
  const Vec3 d = b - a;
  double t0 = 0.0;
  double t1 = 1.0;
  for (int axis = 0; axis < 3; ++axis) {
    if (d[axis] == 0.0) {
      if (a[axis] < lo[axis] || a[axis] > hi[axis]) return false;
      continue;
    }
    double near = (lo[axis] - a[axis]) / d[axis];
    double far = (hi[axis] - a[axis]) / d[axis];
    if (near > far) std::swap(near, far);
    t0 = std::max(t0, near);
    t1 = std::min(t1, far);
    if (t0 > t1) return false;
  }
  return true;
}

StepOutcome step(WorldState& s, std::span<const Vec3> actions) {
  if (actions.size() != s.agents.size()) {
    throw ContractError("step expects " + std::to_string(s.agents.size()) + " actions, got " +
                        std::to_string(actions.size()));
  }
  StepOutcome out;
  move_obstacles(s);
  move_targets(s);

  std::vector<int> destroyed;
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    AgentState& agent = s.agents[i];
    if (!actions[i].finite()) throw ContractError("non-finite action for agent " + std::to_string(agent.id));
    const AgentState next = apply_action(agent, actions[i], s.config);
    std::string reason;
    if (!inside_arena(s.config, next.position)) {
      reason = "boundary";
    } else {
      for (const auto& o : s.obstacles) {
        if (segment_hits_box(agent.position, next.position, o.box)) {
          reason = "obstacle";
          break;
        }
      }
    }
    if (reason.empty()) {
      agent = next;
    } else {
      agent.alive = false;
      destroyed.push_back(static_cast<int>(i));
      out.events.push_back({EventKind::destroyed, agent.id, reason});
    }
  }

  if (s.config.random_tick && advance_random_tick(s, s.rng.uniform())) {
    for (auto& t : s.targets) {
      PlacementQuery q{s.config.spawn_clearance, std::nullopt, -1, t.id};
      t.position = randomize_position(s, q);
    }
    out.events.push_back({EventKind::targets_relocated, -1, {}});
  }

  for (int i : destroyed) {
    AgentState& agent = s.agents[i];
    PlacementQuery q{s.config.spawn_clearance, std::nullopt, agent.id, -1};
    agent.position = randomize_position(s, q);
    agent.velocity = {};
    agent.alive = true;
    out.events.push_back({EventKind::respawned, agent.id, {}});
  }

  ++s.step;
  return out;
}

}  // namespace swarmnav
