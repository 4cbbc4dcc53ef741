#include "swarmnav/policy.hpp"

#include <algorithm>
#include <cmath>

#include "swarmnav/error.hpp"
#include "swarmnav/optim.hpp"

namespace swarmnav {

using nlohmann::json;

std::vector<Vec3> ZeroPolicy::act(const SwarmEnv& env) {
  return std::vector<Vec3>(static_cast<std::size_t>(env.agent_count()));
}

std::string to_string(ActionSquash s) { return s == ActionSquash::clip ? "clip" : "tanh"; }

ActionSquash action_squash_from_string(const std::string& s) {
  if (s == "clip") return ActionSquash::clip;
  if (s == "tanh") return ActionSquash::tanh;
  throw ConfigError("unknown action squash '" + s + "'");
}

void to_json(json& j, const PolicyModel& m) {
  j = json{{"spec", m.spec}, {"squash", to_string(m.squash)}, {"params", nn::vector_to_json(m.params)}};
}

void from_json(const json& j, PolicyModel& m) {
  m.spec = j.at("spec").get<nn::NetworkSpec>();
  m.squash = action_squash_from_string(j.at("squash").get<std::string>());
  m.params = nn::vector_from_json(j.at("params"));
  if (m.params.size() != nn::Network(m.spec).parameter_count()) {
    throw ConfigError("policy parameters do not match the network spec");
  }
}

Vec3 to_world_action(const Eigen::Ref<const nn::Vector>& a, ActionSquash squash, double max_action) {
  Vec3 u;
  for (int k = 0; k < 3; ++k) {
    const double v = squash == ActionSquash::clip ? std::clamp(a[k], -1.0, 1.0) : std::tanh(a[k]);
    u[k] = max_action * v;
  }
  return u;
}

NetworkPolicy::NetworkPolicy(PolicyModel model, bool stochastic, std::uint64_t seed)
    : model_(std::move(model)), net_(model_.spec), stochastic_(stochastic), rng_(seed) {}

void NetworkPolicy::reset(const SwarmEnv& env) {
  episode_ = env.episode();
  if (net_.spec().recurrent()) memory_ = net_.zero_memory(env.agent_count());
}

std::vector<Vec3> NetworkPolicy::act(const SwarmEnv& env) {
  if (env.observation_width() != model_.spec.input_width) {
    throw ConfigError("policy expects observation width " + std::to_string(model_.spec.input_width) + ", env gives " +
                      std::to_string(env.observation_width()));
  }
  if (episode_ != env.episode() || (net_.spec().recurrent() && memory_.h.cols() != env.agent_count())) reset(env);
  const nn::Matrix obs = env.observe();
  nn::Matrix mean;
  if (net_.spec().recurrent()) {
    mean = std::move(net_.forward(model_.params, std::vector<nn::Matrix>{obs}, &memory_, nullptr).front());
  } else {
    mean = net_.forward(model_.params, obs);
  }
  const nn::Vector log_std = net_.log_std(model_.params);
  std::vector<Vec3> actions(static_cast<std::size_t>(obs.cols()));
  for (nn::Index i = 0; i < obs.cols(); ++i) {
    nn::Vector a = mean.col(i);
    if (stochastic_) a = nn::sample_action(a, log_std, rng_).action;
    actions[static_cast<std::size_t>(i)] = to_world_action(a, model_.squash, env.world().config.max_action);
  }
  return actions;
}

}  // namespace swarmnav
