#include <gtest/gtest.h>

#include <cmath>

#include "swarmnav/config.hpp"
#include "swarmnav/error.hpp"
#include "swarmnav/world.hpp"

using namespace swarmnav;

namespace {

EnvConfig empty_arena(double axis = 20.0, int agents = 1) {
  EnvConfig c;
  c.axis_length = axis;
  c.agent_count = agents;
  c.random_tick = false;
  c.seed = 3;
  return c;
}

bool overlaps_any(const std::vector<Obstacle>& obs) {
  for (std::size_t i = 0; i < obs.size(); ++i) {
    for (std::size_t j = i + 1; j < obs.size(); ++j) {
      const Vec3 a = obs[i].box.lo(), b = obs[i].box.hi(), c = obs[j].box.lo(), d = obs[j].box.hi();
      bool sep = false;
      for (int k = 0; k < 3; ++k) sep = sep || b[k] <= c[k] || d[k] <= a[k];
      if (!sep) return true;
    }
  }
  return false;
}

// Point-vs-entity clearance checked directly against every entity.
bool clearance_ok(const WorldState& s, const Vec3& p, double clearance) {
  const double L = s.config.axis_length;
  for (int k = 0; k < 3; ++k) {
    if (p[k] < 0 || p[k] > L) return false;
  }
  for (const auto& o : s.obstacles) {
    const Vec3 lo = o.box.lo(), hi = o.box.hi();
    double d2 = 0;
    for (int k = 0; k < 3; ++k) {
      const double e = std::max({lo[k] - p[k], 0.0, p[k] - hi[k]});
      d2 += e * e;
    }
    if (std::sqrt(d2) < clearance) return false;
  }
  for (const auto& a : s.agents) {
    if (distance(a.position, p) < clearance) return false;
  }
  for (const auto& t : s.targets) {
    if (distance(t.position, p) < clearance) return false;
  }
  return true;
}

}  // namespace

TEST(World, SingleTargetRowOnePlacesHundredDisjointBoxes) {
  EnvConfig c = presets::single_target(1);
  c.seed = 11;
  const WorldState s = build_world(c);
  ASSERT_EQ(s.obstacles.size(), 100u);
  EXPECT_FALSE(overlaps_any(s.obstacles));
  for (const auto& o : s.obstacles) {
    for (int k = 0; k < 3; ++k) {
      EXPECT_GE(2 * o.box.half_extents[k], 1.0 - 1e-12);
      EXPECT_LE(2 * o.box.half_extents[k], 10.0 + 1e-12);
    }
  }
}

TEST(World, EmptyArenaAgentAndTargetDistinct) {
  EnvConfig c = empty_arena();
  const WorldState s = build_world(c);
  ASSERT_EQ(s.agents.size(), 1u);
  ASSERT_EQ(s.targets.size(), 1u);
  EXPECT_NE(s.agents[0].position, s.targets[0].position);
  EXPECT_TRUE(inside_arena(c, s.agents[0].position));
}

TEST(World, CrowdedRowEitherPlacesDisjointOrThrows) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    EnvConfig c = presets::single_target(3);
    c.seed = seed;
    try {
      const WorldState s = build_world(c);
      EXPECT_EQ(s.obstacles.size(), 30u);
      EXPECT_FALSE(overlaps_any(s.obstacles));
    } catch (const PlacementError&) {
      SUCCEED();
    }
  }
}

TEST(World, RandomizedPositionsRespectClearance) {
  EnvConfig c = presets::single_target(2);
  c.seed = 5;
  WorldState s = build_world(c);
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 p = randomize_position(s, 1.0);
    if (!clearance_ok(s, p, 1.0)) ++violations;
  }
  EXPECT_EQ(violations, 0);
}

TEST(World, SingleFreeVoxelIsFound) {
  WorldState s = build_world(empty_arena(3.0, 1));
  s.agents.clear();
  s.targets.clear();
  // Blocks every lattice cell except the one centered at (0.5, 0.5, 0.5).
  s.obstacles = {{0, {{2.0, 1.5, 1.5}, {1.0, 1.5, 1.5}}, {}},
                 {1, {{0.5, 2.0, 1.5}, {0.5, 1.0, 1.5}}, {}},
                 {2, {{0.5, 0.5, 2.0}, {0.5, 0.5, 1.0}}, {}}};
  for (int i = 0; i < 20; ++i) EXPECT_EQ(randomize_position(s, 0.0), (Vec3{0.5, 0.5, 0.5}));
  s.obstacles.push_back({3, {{0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}}, {}});
  EXPECT_THROW(randomize_position(s, 0.0), PlacementError);
}

TEST(World, KinematicActionIsExact) {
  EnvConfig c = empty_arena();
  AgentState a;
  a.position = {0, 0, 0};
  EXPECT_EQ(apply_action(a, {0.3, 0, 0}, c).position, (Vec3{0.3, 0, 0}));
  EXPECT_EQ(apply_action(a, {0, 0, 0}, c).position, a.position);
  // Clamped per component.
  EXPECT_EQ(apply_action(a, {2, -2, 0.1}, c).position, (Vec3{0.5, -0.5, 0.1}));
}

TEST(World, PhysicalGravityStep) {
  EnvConfig c = empty_arena();
  c.physics_mode = PhysicsMode::physical;
  AgentState a;
  a.position = {5, 5, 5};
  const AgentState n = apply_action(a, {0, 0, 0}, c);
  EXPECT_NEAR(n.velocity.z, -9.81 * 0.02 * (1 - 0.25 * 0.02), 1e-15);
  EXPECT_NEAR(n.position.z, 5 + n.velocity.z * 0.02, 1e-15);
  EXPECT_EQ(n.velocity.x, 0.0);
}

TEST(World, CollisionDestroysAndRespawns) {
  EnvConfig c = empty_arena(20.0, 1);
  c.obstacle_placement = Placement::static_listed;
  c.obstacle_count = 1;
  c.obstacle_size_min = 2.0;
  c.obstacle_size_max = 2.0;
  c.obstacles = {{{9.8, 10, 10}, {1, 1, 1}}};
  c.agent_spawn_region = Aabb{{8.5, 10.5, 10.5}, {0.5, 0.5, 0.5}};
  c.spawn_clearance = 0.0;
  WorldState s = build_world(c);
  ASSERT_EQ(s.agents[0].position, (Vec3{8.5, 10.5, 10.5}));
  const Vec3 u{0.5, 0, 0};
  const StepOutcome out = step(s, std::span<const Vec3>(&u, 1));
  ASSERT_GE(out.events.size(), 2u);
  EXPECT_EQ(out.events[0].kind, EventKind::destroyed);
  EXPECT_EQ(out.events[1].kind, EventKind::respawned);
  EXPECT_TRUE(s.agents[0].alive);
  EXPECT_FALSE(s.obstacles[0].box.contains(s.agents[0].position));
}

TEST(World, LeavingArenaDestroys) {
  EnvConfig c = empty_arena(20.0, 1);
  c.agent_spawn_region = Aabb{{0.5, 10.5, 10.5}, {0.5, 0.5, 0.5}};
  c.spawn_clearance = 0.0;
  WorldState s = build_world(c);
  const Vec3 u{-0.5, 0, 0};
  bool destroyed = false;
  for (int t = 0; t < 3; ++t) {
    const StepOutcome out = step(s, std::span<const Vec3>(&u, 1));
    for (const auto& e : out.events) destroyed = destroyed || (e.kind == EventKind::destroyed && e.detail == "boundary");
  }
  EXPECT_TRUE(destroyed);
  EXPECT_TRUE(inside_arena(c, s.agents[0].position));
}

TEST(World, ZeroActionsOnlyAdvanceCounters) {
  EnvConfig c = empty_arena(20.0, 3);
  WorldState s = build_world(c);
  const WorldState before = s;
  std::vector<Vec3> zero(3);
  const StepOutcome out = step(s, zero);
  EXPECT_TRUE(out.events.empty());
  EXPECT_EQ(s.step, 1);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(s.agents[i].position, before.agents[i].position);
  EXPECT_EQ(s.targets[0].position, before.targets[0].position);
}

TEST(World, TickThresholdCountsDraws) {
  EnvConfig c = empty_arena();
  WorldState s = build_world(c);
  s.tick_count = 0;
  for (double d : {0.9, 0.2, 0.86}) advance_random_tick(s, d);
  EXPECT_EQ(s.tick_count, 2);
}

TEST(World, TickRateMatchesExpectation) {
  EnvConfig c = empty_arena();
  WorldState s = build_world(c);
  Rng rng(99);
  int relocations = 0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) relocations += advance_random_tick(s, rng.uniform()) ? 1 : 0;
  const double expected = n * 0.15 / 100.0;
  EXPECT_NEAR(relocations, expected, 0.1 * expected);
}

TEST(World, ActionCountMismatchThrows) {
  WorldState s = build_world(empty_arena(20.0, 2));
  std::vector<Vec3> one(1);
  EXPECT_THROW(step(s, one), ContractError);
}

TEST(World, DeterministicAndContained) {
  EnvConfig c = presets::multi_target(2);
  c.seed = 21;
  c.agent_count = 10;
  WorldState a = build_world(c), b = build_world(c);
  Rng ra(4), rb(4);
  for (int t = 0; t < 300; ++t) {
    std::vector<Vec3> ua(10), ub(10);
    for (int i = 0; i < 10; ++i) {
      ua[i] = {ra.uniform(-1, 1), ra.uniform(-1, 1), ra.uniform(-1, 1)};
      ub[i] = {rb.uniform(-1, 1), rb.uniform(-1, 1), rb.uniform(-1, 1)};
    }
    step(a, ua);
    step(b, ub);
    for (const auto& ag : a.agents) EXPECT_TRUE(inside_arena(c, ag.position));
    for (const auto& tg : a.targets) EXPECT_TRUE(inside_arena(c, tg.position));
    for (const auto& o : a.obstacles) {
      for (int k = 0; k < 3; ++k) {
        EXPECT_GE(o.box.lo()[k], -1e-9);
        EXPECT_LE(o.box.hi()[k], c.axis_length + 1e-9);
      }
    }
  }
  ASSERT_EQ(a.agents.size(), b.agents.size());
  for (std::size_t i = 0; i < a.agents.size(); ++i) EXPECT_EQ(a.agents[i].position, b.agents[i].position);
  for (std::size_t i = 0; i < a.obstacles.size(); ++i) EXPECT_EQ(a.obstacles[i].box, b.obstacles[i].box);
  EXPECT_EQ(a.rng.next_u64(), b.rng.next_u64());
}

TEST(World, ConfigJsonRoundTrip) {
  const EnvConfig c = presets::multi_target(1);
  const EnvConfig back = nlohmann::json(c).get<EnvConfig>();
  EXPECT_EQ(back, c);
  EnvConfig bad = c;
  bad.target_count = 0;
  EXPECT_THROW(validate(bad), ConfigError);
}
