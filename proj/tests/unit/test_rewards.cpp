#include <gtest/gtest.h>

#include <cmath>

#include "swarmnav/rewards.hpp"
#include "swarmnav/observation.hpp"

using namespace swarmnav;

TEST(Rewards, Navigation) {
  EXPECT_DOUBLE_EQ(navigation_reward(3.0, 3.0), 1.0);
  EXPECT_DOUBLE_EQ(navigation_reward(4.0, 3.0), 0.5);
  EXPECT_DOUBLE_EQ(navigation_reward(1.0, 3.0), 1.0);
  EXPECT_EQ(navigation_reward(kUnreachable, 3.0), 0.0);
  double prev = 2;
  for (double b = 3; b < 200; b += 0.75) {
    const double r = navigation_reward(b, 3.0);
    EXPECT_LE(r, prev);
    EXPECT_GE(r, 0.0);
    prev = r;
  }
}

TEST(Rewards, Organization) {
  const Vec3 o{0, 0, 0};
  const std::vector<Vec3> one{{4, 0, 0}};
  EXPECT_NEAR(organization_reward(o, one, 3.0, 9.0), 0.5 / 3.0, 1e-15);
  const std::vector<Vec3> close{{2, 0, 0}};
  EXPECT_EQ(organization_reward(o, close, 3.0, 9.0), -1.0);
  EXPECT_EQ(organization_reward(o, {}, 3.0, 9.0), -1.0);
  const std::vector<Vec3> far{{20, 0, 0}};
  EXPECT_EQ(organization_reward(o, far, 3.0, 9.0), -1.0);
  // Two in band: (1 - σ(1)) / 6 + (1 - σ(3)) / 6.
  const std::vector<Vec3> two{{4, 0, 0}, {0, 6, 0}};
  EXPECT_NEAR(organization_reward(o, two, 3.0, 9.0), 0.5 / 6 + 0.25 / 6, 1e-15);
  // A sub-D_s neighbor dominates.
  const std::vector<Vec3> mixed{{4, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  EXPECT_EQ(organization_reward(o, mixed, 3.0, 9.0), -1.0);
}

TEST(Rewards, Safety) {
  EXPECT_EQ(safety_reward({{0, 0, 0}}), 1.0);
  EXPECT_DOUBLE_EQ(safety_reward({{0.5, 0.5}}), 0.5);
  EXPECT_DOUBLE_EQ(safety_reward({{1.0, 1.0, 1.0}}), 0.25);
  EXPECT_GT(safety_reward({{0.2}}), safety_reward({{0.3}}));
}

TEST(Rewards, SwarmAggregation) {
  const std::vector<int> ids{0, 1, 2, 3};
  const std::vector<double> rs(4, 1.5);
  SwarmRewards s = swarm_reward(ids, rs, {{0, 1, 2, 3}});
  EXPECT_EQ(s.rs_per_swarm, (std::vector<double>{1.5}));
  EXPECT_EQ(s.r_ms, 1.5);

  const std::vector<double> mixed{1.0, 1.0, 0.5, 0.5};
  s = swarm_reward(ids, mixed, {{0, 1}, {2, 3}});
  EXPECT_DOUBLE_EQ(s.r_ms, 0.75);
}

TEST(Rewards, PunishmentComposition) {
  const std::vector<int> ids{7};
  const RewardBreakdown b = combine_rewards(ids, {1.0}, {1.0}, {1.0}, {-1.0}, {{7}}, 1.0);
  EXPECT_EQ(b.rs_agent[0], 2.0);
  EXPECT_EQ(b.r_ms, 2.0);
  EXPECT_EQ(b.signal[0], 4.0);
  const RewardBreakdown w = combine_rewards(ids, {1.0}, {1.0}, {1.0}, {0.0}, {{7}}, 0.0);
  EXPECT_EQ(w.signal[0], 3.0);
}

TEST(Rewards, BoundsOverGrid) {
  for (double b = 0; b < 50; b += 0.37) {
    const double rn = navigation_reward(b, 3.0);
    EXPECT_GE(rn, 0.0);
    EXPECT_LE(rn, 1.0);
    const std::vector<Vec3> n{{b, 0, 0}, {0, b * 0.5, 0}};
    const double ro = organization_reward({0, 0, 0}, n, 3.0, 9.0);
    EXPECT_GE(ro, -1.0);
    EXPECT_LE(ro, 1.0);
  }
}

TEST(Rewards, MismatchedLengthsThrow) {
  const std::vector<int> ids{0, 1};
  const std::vector<double> rs{1.0};
  EXPECT_ANY_THROW(swarm_reward(ids, rs, {{0, 1}}));
}
