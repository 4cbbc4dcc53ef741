#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmnav/metrics.hpp"
#include "swarmnav/nn.hpp"
#include "swarmnav/optim.hpp"
#include "swarmnav/trainer.hpp"

namespace swarmnav {

struct SacConfig {
  std::int64_t total_steps = 55'000'000;
  int batch_size = 256;
  int buffer_size = 10240;
  double learning_rate = 7e-4;
  double tau = 0.005;
  double initial_entropy_coefficient = 0.9;
  int buffer_initial_steps = 12;  // thousands of transitions before updates start
  int steps_per_update = 3;       // lockstep env steps per update cycle
  int reward_signal_updates = 3;  // critic steps per update cycle
  bool save_replay_buffer = true;
  double gamma = 0.99;
  int instances = 28;
  int summary_interval = 10240;   // transitions per metric row
  std::string network = "default";
  std::uint64_t seed = 0;

  std::int64_t warmup_transitions() const { return static_cast<std::int64_t>(buffer_initial_steps) * 1000; }
  void validate() const;
  bool operator==(const SacConfig&) const = default;
};

void to_json(nlohmann::json& j, const SacConfig& c);
void from_json(const nlohmann::json& j, SacConfig& c);

/// Fixed-capacity ring of transitions. Actions are stored squashed, in [-1, 1].
class ReplayBuffer {
 public:
  ReplayBuffer() = default;
  ReplayBuffer(int capacity, int obs_width, int action_dim);

  void add(const Eigen::Ref<const nn::Vector>& obs, const Eigen::Ref<const nn::Vector>& action, double reward,
           const Eigen::Ref<const nn::Vector>& next_obs, bool done);

  int capacity() const { return capacity_; }
  int size() const { return size_; }
  std::int64_t inserted() const { return inserted_; }

  struct Sample {
    nn::Matrix obs, action, next_obs;
    nn::Vector reward, done;
  };
  Sample sample(int batch, Rng& rng) const;
  Sample gather(const std::vector<int>& rows) const;

  void save(const std::string& path) const;
  static ReplayBuffer load(const std::string& path);

  bool operator==(const ReplayBuffer& o) const;

 private:
  int capacity_ = 0;
  int head_ = 0;
  int size_ = 0;
  std::int64_t inserted_ = 0;
  nn::Matrix obs_, action_, next_obs_;
  nn::Vector reward_, done_;
};

/// r + gamma * (1 - done) * (min(q1, q2) - alpha * next_log_prob).
double soft_q_target(double reward, double done, double gamma, double q1_target, double q2_target, double alpha,
                     double next_log_prob);

/// target <- tau * online + (1 - tau) * target.
void soft_update(nn::Vector& target, const nn::Vector& online, double tau);

/// log(1 - tanh(u)^2) evaluated without cancellation.
double log_one_minus_tanh_sq(double u);

/// Tanh-squashed Gaussian sample from fixed noise `eps`.
struct SquashedSample {
  nn::Vector pre;     // u = mean + std * eps
  nn::Vector action;  // tanh(u)
  double log_prob = 0.0;
};
SquashedSample squashed_sample(const Eigen::Ref<const nn::Vector>& mean, const Eigen::Ref<const nn::Vector>& log_std,
                               const Eigen::Ref<const nn::Vector>& eps);

struct SacLosses {
  double q1_loss = 0.0;
  double q2_loss = 0.0;
  double policy_loss = 0.0;
  double alpha_loss = 0.0;
  double alpha = 0.0;
  double entropy = 0.0;
};

struct SacState {
  nn::Vector policy, q1, q2, q1_target, q2_target;
  double log_alpha = 0.0;
  nn::Adam policy_opt, q1_opt, q2_opt, alpha_opt;
  std::int64_t steps = 0;
  std::int64_t updates = 0;  // update cycles
};

class SacTrainer {
 public:
  SacTrainer(EnvConfig env, TaskConfig task, SacConfig config);

  const SacConfig& config() const { return config_; }
  const nn::Network& policy_net() const { return policy_net_; }
  const nn::Network& q_net() const { return q_net_; }
  SacState& state() { return state_; }
  const SacState& state() const { return state_; }
  double alpha() const;
  double target_entropy() const { return -static_cast<double>(policy_net_.spec().action_dim); }

  /// Bellman targets for a sample batch, drawing next-action noise from `rng`.
  nn::Vector q_targets(const ReplayBuffer::Sample& batch, Rng& rng) const;

  /// One critic step on both Q networks followed by the Polyak target update.
  SacLosses critic_update(const ReplayBuffer::Sample& batch);
  /// One policy step and one entropy-coefficient step.
  SacLosses actor_update(const ReplayBuffer::Sample& batch);

  /// Trains until total_steps transitions were collected. If `replay_path` is
  /// non-empty and save_replay_buffer is set, the replay buffer is written
  /// there at the end.
  void train(const std::function<void(const MetricRecord&)>& on_update = {}, const std::string& replay_path = {});

  const ReplayBuffer& replay() const { return replay_; }

  PolicyModel policy_model() const;
  nlohmann::json checkpoint() const;
  void restore(const nlohmann::json& checkpoint);

 private:
  nn::Matrix q_input(const nn::Matrix& obs, const nn::Matrix& action) const;

  EnvConfig env_;
  TaskConfig task_;
  SacConfig config_;
  nn::Network policy_net_;
  nn::Network q_net_;
  SacState state_;
  ReplayBuffer replay_;
  Rng rng_;
};

}  // namespace swarmnav
