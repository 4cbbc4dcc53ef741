#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "swarmnav/env.hpp"
#include "swarmnav/oracle.hpp"

using namespace swarmnav;

namespace {

EnvConfig one_agent(const Vec3& agent, const Vec3& target, double axis = 20.0) {
  EnvConfig c;
  c.axis_length = axis;
  c.agent_count = 1;
  c.random_tick = false;
  c.target_positions = {target};
  c.agent_spawn_region = Aabb{agent, {0.5, 0.5, 0.5}};
  c.spawn_clearance = 0.0;
  return c;
}

}  // namespace

TEST(Oracle, FreeSpaceHeadsAlongTargetDirection) {
  SwarmEnv env(one_agent({3.5, 4.5, 5.5}, {15.5, 10.5, 12.5}), TaskConfig{});
  OraclePolicy p;
  const Vec3 u = p.act(env)[0];
  const Vec3 dir = (env.world().targets[0].position - env.world().agents[0].position).normalized();
  ASSERT_GT(u.norm(), 0.0);
  EXPECT_NEAR(u.normalized().dot(dir), 1.0, 1e-9);
  for (int k = 0; k < 3; ++k) EXPECT_LE(std::abs(u[k]), 0.5 + 1e-12);
}

TEST(Oracle, HoversInsideSafeShell) {
  SwarmEnv env(one_agent({10.5, 10.5, 10.5}, {11.5, 10.5, 10.5}), TaskConfig{});
  OraclePolicy p;
  EXPECT_EQ(p.act(env)[0], (Vec3{0, 0, 0}));
}

TEST(Oracle, RepelsFromCrowdingNeighbor) {
  EnvConfig c = one_agent({10.5, 10.5, 10.5}, {10.5, 12.5, 10.5});
  c.agent_count = 2;
  c.agent_spawn_region = Aabb{{10.5, 10.5, 10.5}, {1.0, 0.5, 0.5}};
  SwarmEnv env(c, TaskConfig{});
  ASSERT_LT(distance(env.world().agents[0].position, env.world().agents[1].position), 3.0);
  OraclePolicy p;
  const auto u = p.act(env);
  const Vec3 away = env.world().agents[0].position - env.world().agents[1].position;
  EXPECT_GT(u[0].dot(away), 0.0);
  EXPECT_LT(u[1].dot(away), 0.0);
}

TEST(Oracle, UnreachableTargetGivesZero) {
  EnvConfig c = one_agent({3.5, 10.5, 10.5}, {15.5, 10.5, 10.5});
  c.obstacle_placement = Placement::static_listed;
  c.obstacle_count = 1;
  c.obstacle_size_min = 1.0;
  c.obstacle_size_max = 20.0;
  c.obstacles = {{{10, 10, 10}, {0.5, 10, 10}}};
  SwarmEnv env(c, TaskConfig{});
  OraclePolicy p;
  EXPECT_EQ(p.act(env)[0], (Vec3{0, 0, 0}));
}

TEST(Oracle, PassesThroughHoleAlongDescent) {
  // Wall at x in [9, 10] with a 2x2 hole at y, z in [2, 4].
  const std::vector<Aabb> boxes{{{9.5, 12, 10}, {0.5, 8, 10}}, {{9.5, 1, 10}, {0.5, 1, 10}},
                                {{9.5, 3, 1}, {0.5, 1, 1}},    {{9.5, 3, 12}, {0.5, 1, 8}}};
  EnvConfig c = one_agent({4.5, 15.5, 15.5}, {15.5, 15.5, 15.5});
  c.obstacle_placement = Placement::static_listed;
  c.obstacle_count = static_cast<int>(boxes.size());
  c.obstacle_size_min = 1.0;
  c.obstacle_size_max = 20.0;
  for (const auto& b : boxes) c.obstacles.push_back({b.center, b.half_extents});
  c.episode_length = 2000;
  TaskConfig task;
  task.auto_reset = false;
  SwarmEnv env(c, task);
  OraclePolicy p;

  const oracle::VoxelWorld vw(boxes, 20);
  const auto field = vw.dijkstra(15, 15, 15);
  auto field_at = [&](const Vec3& q) {
    return field[vw.idx(static_cast<int>(q.x), static_cast<int>(q.y), static_cast<int>(q.z))];
  };

  bool crossed = false;
  double best = field_at(env.world().agents[0].position);
  for (int t = 0; t < 400; ++t) {
    const Vec3 before = env.world().agents[0].position;
    const EnvStep s = env.step(p.act(env));
    for (const auto& e : s.events) ASSERT_NE(e.kind, EventKind::destroyed);
    const Vec3 after = env.world().agents[0].position;
    if (before.x < 9.0 && after.x >= 9.0) {
      crossed = true;
      EXPECT_GE(after.y, 2.0);
      EXPECT_LE(after.y, 4.0);
      EXPECT_GE(after.z, 2.0);
      EXPECT_LE(after.z, 4.0);
    }
    const double d = field_at(after);
    // Never climbs the reference field by more than one voxel diagonal.
    EXPECT_LE(d, best + std::sqrt(3.0));
    best = std::min(best, d);
  }
  EXPECT_TRUE(crossed);
  EXPECT_LT(distance(env.world().agents[0].position, env.world().targets[0].position), 3.0);
}

TEST(Oracle, Deterministic) {
  EnvConfig c = presets::single_target(2);
  c.agent_count = 10;
  c.seed = 4;
  SwarmEnv a(c, TaskConfig{}), b(c, TaskConfig{});
  OraclePolicy pa, pb;
  for (int t = 0; t < 50; ++t) {
    const auto ua = pa.act(a), ub = pb.act(b);
    ASSERT_EQ(ua, ub);
    for (const auto& u : ua) {
      for (int k = 0; k < 3; ++k) ASSERT_LE(std::abs(u[k]), 0.5 + 1e-12);
    }
    a.step(ua);
    b.step(ub);
  }
}
