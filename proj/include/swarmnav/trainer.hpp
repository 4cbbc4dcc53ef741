#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "swarmnav/env.hpp"
#include "swarmnav/nn.hpp"
#include "swarmnav/policy.hpp"

namespace swarmnav {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// Generalized advantage estimation. `values` carries one extra bootstrap
/// entry: values.size() == rewards.size() + 1. dones[t] != 0 cuts both the
/// bootstrap and the recursion after step t.
GaeResult gae(const std::vector<double>& rewards, const std::vector<double>& values, const std::vector<int>& dones,
              double gamma, double lambda);

/// Shifts and scales to mean 0 and (population) standard deviation 1.
void normalize(std::vector<double>& v);

/// lr0 * (1 - progress), floored at zero.
double linear_decay(double lr0, std::int64_t steps, std::int64_t total_steps);

/// A contiguous run of transitions of one agent.
struct Segment {
  std::int64_t start = 0;
  std::int64_t length = 0;
  double bootstrap_value = 0.0;
  int world = 0;
  int agent = 0;
};

/// Transitions stored segment-major: each segment's steps are consecutive.
struct RolloutBatch {
  nn::Matrix obs;        // width x N
  nn::Matrix actions;    // action_dim x N, raw (pre-squash) actions
  nn::Matrix memory_h;   // memory_width x N policy state before each step (recurrent only)
  nn::Matrix memory_c;
  std::vector<double> log_prob;
  std::vector<double> reward;
  std::vector<double> value;
  std::vector<Segment> segments;
  std::vector<double> advantages;
  std::vector<double> returns;
  std::vector<double> completed_returns;  // agent-episode returns that ended in this batch

  std::int64_t size() const { return static_cast<std::int64_t>(reward.size()); }
  /// Fills advantages and returns segment by segment.
  void compute_advantages(double gamma, double lambda);
  void append(const RolloutBatch& other);
};

/// Steps a set of independent worlds in lockstep with a shared stochastic
/// policy and an optional value network, keeping env and memory state across
/// calls.
class RolloutCollector {
 public:
  RolloutCollector(std::vector<SwarmEnv> envs, std::uint64_t seed);

  /// Runs `horizon` lockstep steps and returns envs * agents * horizon transitions.
  RolloutBatch collect(const nn::Network& policy, const nn::Vector& policy_params, const nn::Network* value,
                       const nn::Vector* value_params, int horizon);

  std::vector<SwarmEnv>& envs() { return envs_; }
  Rng& rng() { return rng_; }
  int agents_total() const;

 private:
  std::vector<SwarmEnv> envs_;
  Rng rng_;
  nn::Memory memory_;
  std::vector<double> running_return_;
};

/// Builds `count` envs whose seeds are derived from `seed`.
std::vector<SwarmEnv> make_envs(const EnvConfig& env, const TaskConfig& task, int count, std::uint64_t seed);

}  // namespace swarmnav
