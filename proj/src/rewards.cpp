#include "swarmnav/rewards.hpp"

#include <algorithm>
#include <map>

#include "swarmnav/error.hpp"
#include "swarmnav/observation.hpp"

namespace swarmnav {

double navigation_reward(double b, double safe_radius) {
  if (b == kUnreachable) return 0.0;
  if (b < safe_radius) return 1.0;
  return 1.0 - squash(b - safe_radius);
}

double organization_reward(const Vec3& agent_pos, std::span<const Vec3> neighbor_positions, double safe_radius,
                           double comm_radius) {
  std::vector<double> in_band;
  int too_close = 0;
  for (const auto& p : neighbor_positions) {
    const double b = distance(agent_pos, p);
    if (b < safe_radius) {
      ++too_close;
    } else if (b < comm_radius) {
      in_band.push_back(b);
    }
  }
  if (in_band.empty() && too_close == 0) return -1.0;
  double total = -static_cast<double>(too_close);
  const double norm = 3.0 * static_cast<double>(in_band.size());
  for (double b : in_band) total += (1.0 - squash(b - safe_radius)) / norm;
  return std::clamp(total, -1.0, 1.0);
}

double safety_reward(const SensorReadings& readings) { return 1.0 - squash(readings.sum()); }

SwarmRewards swarm_reward(std::span<const int> agent_ids, std::span<const double> rs_agent,
                          const std::vector<std::vector<int>>& components) {
  if (agent_ids.size() != rs_agent.size()) throw ContractError("reward vectors have mismatched lengths");
  std::map<int, double> by_id;
  for (std::size_t i = 0; i < agent_ids.size(); ++i) by_id[agent_ids[i]] = rs_agent[i];
  SwarmRewards out;
  double total = 0.0;
  for (const auto& members : components) {
    if (members.empty()) continue;
    double sum = 0.0;
    for (int id : members) {
      auto it = by_id.find(id);
      if (it == by_id.end()) throw ContractError("component references agent without a reward");
      sum += it->second;
    }
    const double mean = sum / static_cast<double>(members.size());
    out.rs_per_swarm.push_back(mean);
    total += mean;
  }
  out.r_ms = out.rs_per_swarm.empty() ? 0.0 : total / static_cast<double>(out.rs_per_swarm.size());
  return out;
}

RewardBreakdown combine_rewards(std::span<const int> agent_ids, std::vector<double> r_n, std::vector<double> r_o,
                                std::vector<double> r_s, std::vector<double> punishment,
                                const std::vector<std::vector<int>>& components, double r_ms_weight) {
  const std::size_t n = agent_ids.size();
  if (r_n.size() != n || r_o.size() != n || r_s.size() != n || punishment.size() != n) {
    throw ContractError("reward vectors have mismatched lengths");
  }
  RewardBreakdown b;
  b.agent_ids.assign(agent_ids.begin(), agent_ids.end());
  b.rs_agent.resize(n);
  for (std::size_t i = 0; i < n; ++i) b.rs_agent[i] = r_n[i] + r_o[i] + r_s[i] + punishment[i];
  const SwarmRewards sw = swarm_reward(agent_ids, b.rs_agent, components);
  b.rs_per_swarm = sw.rs_per_swarm;
  b.r_ms = sw.r_ms;
  b.signal.resize(n);
  for (std::size_t i = 0; i < n; ++i) b.signal[i] = b.rs_agent[i] + r_ms_weight * b.r_ms;
  b.r_n = std::move(r_n);
  b.r_o = std::move(r_o);
  b.r_s = std::move(r_s);
  b.punishment = std::move(punishment);
  return b;
}

}  // namespace swarmnav
