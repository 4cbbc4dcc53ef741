#include "swarmnav/ppo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "swarmnav/error.hpp"
#include "swarmnav/losses.hpp"

namespace swarmnav {

using nlohmann::json;

void PpoConfig::validate() const {
  if (total_steps < 1 || time_horizon < 1 || batch_size < 1 || buffer_size < batch_size || epochs < 1 ||
      instances < 1 || sequence_length < 1) {
    throw ConfigError("PPO sizes must be positive and batch_size <= buffer_size");
  }
  if (buffer_size % batch_size != 0) throw ConfigError("PPO buffer_size must be a multiple of batch_size");
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) throw ConfigError("PPO clip_epsilon must be in (0, 1)");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ConfigError("PPO gae_lambda must be in [0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("PPO gamma must be in [0, 1]");
  if (!(learning_rate > 0.0)) throw ConfigError("PPO learning_rate must be positive");
}

void to_json(json& j, const PpoConfig& c) {
  j = json{{"total_steps", c.total_steps},   {"time_horizon", c.time_horizon},
           {"batch_size", c.batch_size},     {"buffer_size", c.buffer_size},
           {"learning_rate", c.learning_rate}, {"linear_decay", c.linear_decay},
           {"beta", c.beta},                 {"clip_epsilon", c.clip_epsilon},
           {"gae_lambda", c.gae_lambda},     {"epochs", c.epochs},
           {"gamma", c.gamma},               {"value_coef", c.value_coef},
           {"max_grad_norm", c.max_grad_norm}, {"sequence_length", c.sequence_length},
           {"instances", c.instances},       {"network", c.network},
           {"seed", c.seed}};
}

void from_json(const json& j, PpoConfig& c) {
  PpoConfig d;
  d.total_steps = j.value("total_steps", d.total_steps);
  d.time_horizon = j.value("time_horizon", d.time_horizon);
  d.batch_size = j.value("batch_size", d.batch_size);
  d.buffer_size = j.value("buffer_size", d.buffer_size);
  d.learning_rate = j.value("learning_rate", d.learning_rate);
  d.linear_decay = j.value("linear_decay", d.linear_decay);
  d.beta = j.value("beta", d.beta);
  d.clip_epsilon = j.value("clip_epsilon", d.clip_epsilon);
  d.gae_lambda = j.value("gae_lambda", d.gae_lambda);
  d.epochs = j.value("epochs", d.epochs);
  d.gamma = j.value("gamma", d.gamma);
  d.value_coef = j.value("value_coef", d.value_coef);
  d.max_grad_norm = j.value("max_grad_norm", d.max_grad_norm);
  d.sequence_length = j.value("sequence_length", d.sequence_length);
  d.instances = j.value("instances", d.instances);
  d.network = j.value("network", d.network);
  d.seed = j.value("seed", d.seed);
  d.validate();
  c = d;
}

PpoTrainer::PpoTrainer(EnvConfig env, TaskConfig task, PpoConfig config)
    : env_(std::move(env)),
      task_(task),
      config_(config),
      policy_net_(nn::NetworkSpec::preset(config.network, nn::Head::policy, task.observation.width())),
      value_net_([&] {
        auto spec = nn::NetworkSpec::preset(config.network, nn::Head::value, task.observation.width());
        spec.memory_width = 0;
        return spec;
      }()),
      rng_(mix_seed(config.seed, 3)) {
  config_.validate();
  Rng init(mix_seed(config_.seed, 0));
  state_.policy = policy_net_.initialize(init);
  state_.value = value_net_.initialize(init);
  state_.policy_opt = nn::Adam(policy_net_.parameter_count());
  state_.value_opt = nn::Adam(value_net_.parameter_count());
}

namespace {

struct Chunk {
  std::int64_t start;
  int length;
};

std::vector<Chunk> make_chunks(const RolloutBatch& b, bool recurrent, int sequence_length) {
  std::vector<Chunk> chunks;
  if (!recurrent) {
    chunks.reserve(static_cast<std::size_t>(b.size()));
    for (std::int64_t k = 0; k < b.size(); ++k) chunks.push_back({k, 1});
    return chunks;
  }
  for (const auto& s : b.segments) {
    for (std::int64_t o = 0; o < s.length; o += sequence_length) {
      chunks.push_back({s.start + o, static_cast<int>(std::min<std::int64_t>(sequence_length, s.length - o))});
    }
  }
  return chunks;
}

}  // namespace

PpoLosses PpoTrainer::update(RolloutBatch& buffer, double learning_rate, double beta) {
  if (buffer.advantages.size() != static_cast<std::size_t>(buffer.size())) {
    throw ContractError("ppo update needs advantages; call compute_advantages first");
  }
  std::vector<double> adv = buffer.advantages;
  normalize(adv);

  const bool recurrent = policy_net_.spec().recurrent();
  const int seq = recurrent ? config_.sequence_length : 1;
  std::vector<Chunk> chunks = make_chunks(buffer, recurrent, seq);
  const std::size_t per_batch = static_cast<std::size_t>(std::max(1, config_.batch_size / seq));
  const int width = policy_net_.spec().input_width;
  const int adim = policy_net_.spec().action_dim;
  const nn::Index log_std_at = *policy_net_.layout().log_std;

  PpoLosses total;
  int minibatches = 0;
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    for (std::size_t i = chunks.size(); i > 1; --i) std::swap(chunks[i - 1], chunks[rng_.below(i)]);
    for (std::size_t first = 0; first < chunks.size(); first += per_batch) {
      const std::size_t count = std::min(per_batch, chunks.size() - first);
      const auto c_count = static_cast<nn::Index>(count);
      int max_len = 0;
      std::int64_t valid = 0;
      for (std::size_t c = 0; c < count; ++c) {
        max_len = std::max(max_len, chunks[first + c].length);
        valid += chunks[first + c].length;
      }

      // Gather inputs per time step; padded slots stay zero and are masked.
      std::vector<nn::Matrix> inputs(static_cast<std::size_t>(max_len), nn::Matrix::Zero(width, c_count));
      nn::Matrix flat_obs(width, valid), flat_act(adim, valid);
      nn::Vector old_logp(valid), flat_adv(valid), flat_ret(valid);
      std::vector<std::pair<int, nn::Index>> slot(static_cast<std::size_t>(valid));
      nn::Memory memory;
      if (recurrent) {
        memory = policy_net_.zero_memory(c_count);
        for (std::size_t c = 0; c < count; ++c) {
          memory.h.col(static_cast<nn::Index>(c)) = buffer.memory_h.col(chunks[first + c].start);
          memory.c.col(static_cast<nn::Index>(c)) = buffer.memory_c.col(chunks[first + c].start);
        }
      }
      std::int64_t k = 0;
      for (std::size_t c = 0; c < count; ++c) {
        for (int t = 0; t < chunks[first + c].length; ++t, ++k) {
          const std::int64_t src = chunks[first + c].start + t;
          const auto cs = static_cast<std::size_t>(src);
          inputs[static_cast<std::size_t>(t)].col(static_cast<nn::Index>(c)) = buffer.obs.col(src);
          flat_obs.col(k) = buffer.obs.col(src);
          flat_act.col(k) = buffer.actions.col(src);
          old_logp[k] = buffer.log_prob[cs];
          flat_adv[k] = adv[cs];
          flat_ret[k] = buffer.returns[cs];
          slot[static_cast<std::size_t>(k)] = {t, static_cast<nn::Index>(c)};
        }
      }

      // Policy.
      nn::Trace trace;
      const auto means = policy_net_.forward(state_.policy, inputs, recurrent ? &memory : nullptr, &trace);
      nn::Matrix flat_mean(adim, valid);
      for (std::int64_t s = 0; s < valid; ++s) {
        const auto [t, c] = slot[static_cast<std::size_t>(s)];
        flat_mean.col(s) = means[static_cast<std::size_t>(t)].col(c);
      }
      const nn::Vector log_std = policy_net_.log_std(state_.policy);
      const auto pg = nn::clipped_surrogate(flat_mean, log_std, flat_act, old_logp, flat_adv, config_.clip_epsilon);
      const auto eg = nn::negative_entropy(log_std, valid, adim);
      std::vector<nn::Matrix> d_means(static_cast<std::size_t>(max_len), nn::Matrix::Zero(adim, c_count));
      for (std::int64_t s = 0; s < valid; ++s) {
        const auto [t, c] = slot[static_cast<std::size_t>(s)];
        d_means[static_cast<std::size_t>(t)].col(c) = pg.d_mean.col(s);
      }
      nn::Vector pgrad = nn::Vector::Zero(policy_net_.parameter_count());
      policy_net_.backward(state_.policy, trace, d_means, pgrad);
      pgrad.segment(log_std_at, adim) += pg.d_log_std + beta * eg.d_log_std;

      // Value.
      nn::Trace vtrace;
      const nn::Matrix v = value_net_.forward(state_.value, flat_obs, &vtrace);
      const auto vg = nn::value_mse(v, flat_ret);
      nn::Vector vgrad = nn::Vector::Zero(value_net_.parameter_count());
      value_net_.backward(state_.value, vtrace, {config_.value_coef * vg.d_value}, vgrad);

      const double loss = pg.loss + config_.value_coef * vg.loss + beta * eg.loss;
      if (!std::isfinite(loss)) {
        throw Error("PPO loss became non-finite (policy " + std::to_string(pg.loss) + ", value " +
                    std::to_string(vg.loss) + ")");
      }
      nn::clip_grad_norm(pgrad, config_.max_grad_norm);
      nn::clip_grad_norm(vgrad, config_.max_grad_norm);
      state_.policy_opt.step(state_.policy, pgrad, learning_rate);
      policy_net_.clamp_parameters(state_.policy);
      state_.value_opt.step(state_.value, vgrad, learning_rate);

      total.policy_loss += pg.loss;
      total.value_loss += vg.loss;
      total.entropy += -eg.loss;
      ++minibatches;
    }
  }
  if (minibatches > 0) {
    total.policy_loss /= minibatches;
    total.value_loss /= minibatches;
    total.entropy /= minibatches;
  }
  return total;
}

void PpoTrainer::train(const std::function<void(const MetricRecord&)>& on_update) {
  RolloutCollector collector(make_envs(env_, task_, config_.instances, mix_seed(config_.seed, 1)),
                             mix_seed(config_.seed, 2));
  const auto t0 = std::chrono::steady_clock::now();
  const int agents = collector.agents_total();
  RolloutBatch buffer;
  std::vector<double> window;
  while (state_.steps < config_.total_steps) {
    const std::int64_t left = config_.total_steps - state_.steps;
    const int horizon = static_cast<int>(std::min<std::int64_t>(config_.time_horizon, (left + agents - 1) / agents));
    RolloutBatch b = collector.collect(policy_net_, state_.policy, &value_net_, &state_.value, horizon);
    b.compute_advantages(config_.gamma, config_.gae_lambda);
    state_.steps += b.size();
    window.insert(window.end(), b.completed_returns.begin(), b.completed_returns.end());
    buffer.append(b);
    if (buffer.size() < config_.buffer_size) continue;

    const double lr =
        config_.linear_decay ? linear_decay(config_.learning_rate, state_.steps, config_.total_steps) : config_.learning_rate;
    const double beta =
        config_.linear_decay ? linear_decay(config_.beta, state_.steps, config_.total_steps) : config_.beta;
    const PpoLosses losses = update(buffer, lr, beta);
    ++state_.updates;
    MetricRecord r;
    r.update = state_.updates;
    r.steps = state_.steps;
    r.mcr = window.empty() ? std::nan("")
                           : std::accumulate(window.begin(), window.end(), 0.0) / static_cast<double>(window.size());
    r.vl = losses.value_loss;
    r.pl = losses.policy_loss;
    r.entropy = losses.entropy;
    r.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (on_update) on_update(r);
    buffer = RolloutBatch{};
    window.clear();
  }
}

PolicyModel PpoTrainer::policy_model() const { return {policy_net_.spec(), state_.policy, ActionSquash::clip}; }

json PpoTrainer::checkpoint() const {
  return json{{"format", "swarmnav-checkpoint"},
              {"version", 1},
              {"algo", "ppo"},
              {"env", env_},
              {"task", task_},
              {"config", config_},
              {"policy", policy_model()},
              {"value", {{"spec", value_net_.spec()}, {"params", nn::vector_to_json(state_.value)}}},
              {"policy_opt", state_.policy_opt},
              {"value_opt", state_.value_opt},
              {"steps", state_.steps},
              {"updates", state_.updates}};
}

void PpoTrainer::restore(const json& j) {
  if (j.value("algo", std::string()) != "ppo") throw ConfigError("checkpoint is not a PPO checkpoint");
  const PolicyModel pm = j.at("policy").get<PolicyModel>();
  if (!(pm.spec == policy_net_.spec())) throw ConfigError("checkpoint policy spec does not match the trainer");
  if (!(j.at("value").at("spec").get<nn::NetworkSpec>() == value_net_.spec())) {
    throw ConfigError("checkpoint value spec does not match the trainer");
  }
  state_.policy = pm.params;
  state_.value = nn::vector_from_json(j.at("value").at("params"));
  state_.policy_opt = j.at("policy_opt").get<nn::Adam>();
  state_.value_opt = j.at("value_opt").get<nn::Adam>();
  state_.steps = j.at("steps").get<std::int64_t>();
  state_.updates = j.at("updates").get<std::int64_t>();
}

}  // namespace swarmnav
