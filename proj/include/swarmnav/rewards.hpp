#pragma once

#include <span>
#include <vector>

#include "swarmnav/sensing.hpp"
#include "swarmnav/swarm.hpp"

namespace swarmnav {

struct RewardConfig {
  double safe_radius = 3.0;   // D_s
  double comm_radius = 9.0;   // D_c
  double punishment = -1.0;   // per destruction event
  double r_ms_weight = 0.0;   // weight of the all-swarm term in the training signal

  bool operator==(const RewardConfig&) const = default;
};

/// 1 - squash(b - D_s) for b >= D_s, 1 below D_s, 0 for unreachable targets.
double navigation_reward(double b, double safe_radius);

/// In-band neighbors (D_s <= b < D_c) each add (1 - squash(b - D_s)) / (3M);
/// each neighbor closer than D_s adds -1; no neighbor at all gives -1.
/// The result is clamped to [-1, 1].
double organization_reward(const Vec3& agent_pos, std::span<const Vec3> neighbor_positions, double safe_radius,
                           double comm_radius);

/// 1 - squash(sum of readings).
double safety_reward(const SensorReadings& readings);

struct RewardBreakdown {
  std::vector<int> agent_ids;
  std::vector<double> r_n, r_o, r_s, punishment;
  std::vector<double> rs_agent;       // r_n + r_o + r_s + punishment
  std::vector<double> rs_per_swarm;   // mean over component members
  double r_ms = 0.0;                  // mean over components
  std::vector<double> signal;         // rs_agent + r_ms_weight * r_ms
};

struct SwarmRewards {
  std::vector<double> rs_per_swarm;
  double r_ms = 0.0;
};

/// Aggregates per-agent totals over components. `rs_agent` is indexed like
/// `agent_ids`; components list agent ids.
SwarmRewards swarm_reward(std::span<const int> agent_ids, std::span<const double> rs_agent,
                          const std::vector<std::vector<int>>& components);

/// Fills every field of the breakdown from its per-agent inputs.
RewardBreakdown combine_rewards(std::span<const int> agent_ids, std::vector<double> r_n, std::vector<double> r_o,
                                std::vector<double> r_s, std::vector<double> punishment,
                                const std::vector<std::vector<int>>& components, double r_ms_weight);

}  // namespace swarmnav
