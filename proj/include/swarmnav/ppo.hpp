#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmnav/metrics.hpp"
#include "swarmnav/nn.hpp"
#include "swarmnav/optim.hpp"
#include "swarmnav/trainer.hpp"

namespace swarmnav {

struct PpoConfig {
  std::int64_t total_steps = 55'000'000;
  int time_horizon = 512;
  int batch_size = 1024;
  int buffer_size = 10240;
  double learning_rate = 7e-4;
  bool linear_decay = true;
  double beta = 0.007;
  double clip_epsilon = 0.3;
  double gae_lambda = 0.96;
  int epochs = 2;
  double gamma = 0.99;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  int sequence_length = 16;  // recurrent policies train on chunks of this length
  int instances = 28;
  std::string network = "default";
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const PpoConfig&) const = default;
};

void to_json(nlohmann::json& j, const PpoConfig& c);
void from_json(const nlohmann::json& j, PpoConfig& c);

struct PpoLosses {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
};

/// Everything needed to resume or evaluate a PPO run.
struct PpoState {
  nn::Vector policy;
  nn::Vector value;
  nn::Adam policy_opt;
  nn::Adam value_opt;
  std::int64_t steps = 0;
  std::int64_t updates = 0;
};

class PpoTrainer {
 public:
  PpoTrainer(EnvConfig env, TaskConfig task, PpoConfig config);

  const PpoConfig& config() const { return config_; }
  const nn::Network& policy_net() const { return policy_net_; }
  const nn::Network& value_net() const { return value_net_; }
  PpoState& state() { return state_; }
  const PpoState& state() const { return state_; }

  /// One clipped-surrogate update over a full buffer (advantages are
  /// normalized here) with entropy coefficient `beta`. Uses the trainer RNG
  /// for minibatch shuffling.
  PpoLosses update(RolloutBatch& buffer, double learning_rate, double beta);

  /// Trains until total_steps transitions were collected. `on_update`
  /// receives each metric row.
  void train(const std::function<void(const MetricRecord&)>& on_update = {});

  PolicyModel policy_model() const;
  nlohmann::json checkpoint() const;
  void restore(const nlohmann::json& checkpoint);

 private:
  EnvConfig env_;
  TaskConfig task_;
  PpoConfig config_;
  nn::Network policy_net_;
  nn::Network value_net_;
  PpoState state_;
  Rng rng_;
};

}  // namespace swarmnav
