#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmnav/env.hpp"
#include "swarmnav/nn.hpp"

namespace swarmnav {

/// Maps the whole swarm's state to one action per agent, in world units.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  /// Called after the env was (re)built so stateful policies can clear memory.
  virtual void reset(const SwarmEnv&) {}
  virtual std::vector<Vec3> act(const SwarmEnv& env) = 0;
};

/// Always hovers.
class ZeroPolicy : public Policy {
 public:
  std::string name() const override { return "zero"; }
  std::vector<Vec3> act(const SwarmEnv& env) override;
};

/// How network outputs become bounded actions.
enum class ActionSquash {
  clip,  // u = max_action * clip(a, -1, 1)
  tanh,  // u = max_action * tanh(a)
};

std::string to_string(ActionSquash s);
ActionSquash action_squash_from_string(const std::string& s);

/// A trained policy network together with its action transform.
struct PolicyModel {
  nn::NetworkSpec spec;
  nn::Vector params;
  ActionSquash squash = ActionSquash::clip;
};

void to_json(nlohmann::json& j, const PolicyModel& m);
void from_json(const nlohmann::json& j, PolicyModel& m);

Vec3 to_world_action(const Eigen::Ref<const nn::Vector>& a, ActionSquash squash, double max_action);

/// Runs a policy network on every agent. Deterministic (mean action) unless
/// `stochastic` is set, in which case actions are sampled from `seed`.
class NetworkPolicy : public Policy {
 public:
  explicit NetworkPolicy(PolicyModel model, bool stochastic = false, std::uint64_t seed = 0);

  std::string name() const override { return "network"; }
  void reset(const SwarmEnv& env) override;
  std::vector<Vec3> act(const SwarmEnv& env) override;

  const PolicyModel& model() const { return model_; }

 private:
  PolicyModel model_;
  nn::Network net_;
  bool stochastic_;
  Rng rng_;
  nn::Memory memory_;
  std::int64_t episode_ = -1;
};

}  // namespace swarmnav
