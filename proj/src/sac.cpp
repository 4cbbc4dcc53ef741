#include "swarmnav/sac.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>

#include "swarmnav/error.hpp"
#include "swarmnav/losses.hpp"

namespace swarmnav {

using nlohmann::json;

void SacConfig::validate() const {
  if (total_steps < 1 || batch_size < 1 || buffer_size < 1 || instances < 1 || steps_per_update < 1 ||
      reward_signal_updates < 0 || buffer_initial_steps < 0 || summary_interval < 1) {
    throw ConfigError("SAC sizes must be positive");
  }
  if (batch_size > buffer_size) throw ConfigError("SAC batch_size must not exceed buffer_size");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("SAC tau must be in (0, 1]");
  if (!(initial_entropy_coefficient > 0.0)) throw ConfigError("SAC initial entropy coefficient must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("SAC learning_rate must be positive");
}

void to_json(json& j, const SacConfig& c) {
  j = json{{"total_steps", c.total_steps},
           {"batch_size", c.batch_size},
           {"buffer_size", c.buffer_size},
           {"learning_rate", c.learning_rate},
           {"tau", c.tau},
           {"initial_entropy_coefficient", c.initial_entropy_coefficient},
           {"buffer_initial_steps", c.buffer_initial_steps},
           {"steps_per_update", c.steps_per_update},
           {"reward_signal_updates", c.reward_signal_updates},
           {"save_replay_buffer", c.save_replay_buffer},
           {"gamma", c.gamma},
           {"instances", c.instances},
           {"summary_interval", c.summary_interval},
           {"network", c.network},
           {"seed", c.seed}};
}

void from_json(const json& j, SacConfig& c) {
  SacConfig d;
  d.total_steps = j.value("total_steps", d.total_steps);
  d.batch_size = j.value("batch_size", d.batch_size);
  d.buffer_size = j.value("buffer_size", d.buffer_size);
  d.learning_rate = j.value("learning_rate", d.learning_rate);
  d.tau = j.value("tau", d.tau);
  d.initial_entropy_coefficient = j.value("initial_entropy_coefficient", d.initial_entropy_coefficient);
  d.buffer_initial_steps = j.value("buffer_initial_steps", d.buffer_initial_steps);
  d.steps_per_update = j.value("steps_per_update", d.steps_per_update);
  d.reward_signal_updates = j.value("reward_signal_updates", d.reward_signal_updates);
  d.save_replay_buffer = j.value("save_replay_buffer", d.save_replay_buffer);
  d.gamma = j.value("gamma", d.gamma);
  d.instances = j.value("instances", d.instances);
  d.summary_interval = j.value("summary_interval", d.summary_interval);
  d.network = j.value("network", d.network);
  d.seed = j.value("seed", d.seed);
  d.validate();
  c = d;
}

// Replay buffer.

ReplayBuffer::ReplayBuffer(int capacity, int obs_width, int action_dim)
    : capacity_(capacity),
      obs_(nn::Matrix::Zero(obs_width, capacity)),
      action_(nn::Matrix::Zero(action_dim, capacity)),
      next_obs_(nn::Matrix::Zero(obs_width, capacity)),
      reward_(nn::Vector::Zero(capacity)),
      done_(nn::Vector::Zero(capacity)) {
  if (capacity < 1) throw ConfigError("replay capacity must be positive");
}

void ReplayBuffer::add(const Eigen::Ref<const nn::Vector>& obs, const Eigen::Ref<const nn::Vector>& action,
                       double reward, const Eigen::Ref<const nn::Vector>& next_obs, bool done) {
  obs_.col(head_) = obs;
  action_.col(head_) = action;
  next_obs_.col(head_) = next_obs;
  reward_[head_] = reward;
  done_[head_] = done ? 1.0 : 0.0;
  head_ = (head_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
  ++inserted_;
}

ReplayBuffer::Sample ReplayBuffer::gather(const std::vector<int>& rows) const {
  const auto b = static_cast<nn::Index>(rows.size());
  Sample s{nn::Matrix(obs_.rows(), b), nn::Matrix(action_.rows(), b), nn::Matrix(obs_.rows(), b), nn::Vector(b),
           nn::Vector(b)};
  for (nn::Index k = 0; k < b; ++k) {
    const int r = rows[static_cast<std::size_t>(k)];
    if (r < 0 || r >= size_) throw ContractError("replay row out of range");
    s.obs.col(k) = obs_.col(r);
    s.action.col(k) = action_.col(r);
    s.next_obs.col(k) = next_obs_.col(r);
    s.reward[k] = reward_[r];
    s.done[k] = done_[r];
  }
  return s;
}

ReplayBuffer::Sample ReplayBuffer::sample(int batch, Rng& rng) const {
  if (size_ < batch || size_ == 0) throw Error("replay underfull: " + std::to_string(size_) + " < " + std::to_string(batch));
  std::vector<int> rows(static_cast<std::size_t>(batch));
  for (auto& r : rows) r = static_cast<int>(rng.below(static_cast<std::uint64_t>(size_)));
  return gather(rows);
}

namespace {

constexpr char kReplayMagic[8] = {'S', 'N', 'R', 'P', 'L', 'A', 'Y', '1'};

template <class T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error("truncated replay snapshot");
  return v;
}

void put_matrix(std::ofstream& out, const nn::Matrix& m) {
  out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
}

void get_matrix(std::ifstream& in, nn::Matrix& m) {
  in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!in) throw Error("truncated replay snapshot");
}

}  // namespace

void ReplayBuffer::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write replay snapshot " + path);
  out.write(kReplayMagic, sizeof kReplayMagic);
  put<std::int32_t>(out, capacity_);
  put<std::int32_t>(out, static_cast<std::int32_t>(obs_.rows()));
  put<std::int32_t>(out, static_cast<std::int32_t>(action_.rows()));
  put<std::int32_t>(out, head_);
  put<std::int32_t>(out, size_);
  put<std::int64_t>(out, inserted_);
  put_matrix(out, obs_);
  put_matrix(out, action_);
  put_matrix(out, next_obs_);
  put_matrix(out, reward_);
  put_matrix(out, done_);
  if (!out) throw Error("failed writing replay snapshot " + path);
}

ReplayBuffer ReplayBuffer::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read replay snapshot " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kReplayMagic, sizeof magic) != 0) throw Error("not a replay snapshot: " + path);
  const int capacity = get<std::int32_t>(in);
  const int width = get<std::int32_t>(in);
  const int adim = get<std::int32_t>(in);
  ReplayBuffer b(capacity, width, adim);
  b.head_ = get<std::int32_t>(in);
  b.size_ = get<std::int32_t>(in);
  b.inserted_ = get<std::int64_t>(in);
  get_matrix(in, b.obs_);
  get_matrix(in, b.action_);
  get_matrix(in, b.next_obs_);
  nn::Matrix r(capacity, 1), d(capacity, 1);
  get_matrix(in, r);
  get_matrix(in, d);
  b.reward_ = r.col(0);
  b.done_ = d.col(0);
  return b;
}

bool ReplayBuffer::operator==(const ReplayBuffer& o) const {
  return capacity_ == o.capacity_ && head_ == o.head_ && size_ == o.size_ && inserted_ == o.inserted_ &&
         obs_ == o.obs_ && action_ == o.action_ && next_obs_ == o.next_obs_ && reward_ == o.reward_ &&
         done_ == o.done_;
}

// Math helpers.

double soft_q_target(double reward, double done, double gamma, double q1_target, double q2_target, double alpha,
                     double next_log_prob) {
  return reward + gamma * (1.0 - done) * (std::min(q1_target, q2_target) - alpha * next_log_prob);
}

void soft_update(nn::Vector& target, const nn::Vector& online, double tau) {
  if (target.size() != online.size()) throw ContractError("soft_update: size mismatch");
  target = tau * online + (1.0 - tau) * target;
}

double log_one_minus_tanh_sq(double u) {
  // 1 - tanh(u)^2 = 4 / (e^u + e^-u)^2
  const double a = std::abs(u);
  return 2.0 * (std::numbers::ln2 - a - std::log1p(std::exp(-2.0 * a)));
}

SquashedSample squashed_sample(const Eigen::Ref<const nn::Vector>& mean, const Eigen::Ref<const nn::Vector>& log_std,
                               const Eigen::Ref<const nn::Vector>& eps) {
  SquashedSample s;
  s.pre = mean + (log_std.array().exp() * eps.array()).matrix();
  s.action = s.pre.array().tanh().matrix();
  s.log_prob = nn::gaussian_log_prob(mean, log_std, s.pre);
  for (nn::Index k = 0; k < s.pre.size(); ++k) s.log_prob -= log_one_minus_tanh_sq(s.pre[k]);
  return s;
}

// Trainer.

SacTrainer::SacTrainer(EnvConfig env, TaskConfig task, SacConfig config)
    : env_(std::move(env)),
      task_(task),
      config_(config),
      policy_net_(nn::NetworkSpec::preset(config.network, nn::Head::policy, task.observation.width())),
      q_net_(nn::NetworkSpec::preset(config.network, nn::Head::q, task.observation.width())),
      replay_(config.buffer_size, task.observation.width(), 3),
      rng_(mix_seed(config.seed, 3)) {
  config_.validate();
  if (policy_net_.spec().recurrent()) throw ConfigError("SAC does not support recurrent networks");
  Rng init(mix_seed(config_.seed, 0));
  state_.policy = policy_net_.initialize(init);
  state_.q1 = q_net_.initialize(init);
  state_.q2 = q_net_.initialize(init);
  state_.q1_target = state_.q1;
  state_.q2_target = state_.q2;
  state_.log_alpha = std::log(config_.initial_entropy_coefficient);
  state_.policy_opt = nn::Adam(policy_net_.parameter_count());
  state_.q1_opt = nn::Adam(q_net_.parameter_count());
  state_.q2_opt = nn::Adam(q_net_.parameter_count());
  state_.alpha_opt = nn::Adam(1);
}

double SacTrainer::alpha() const { return std::exp(state_.log_alpha); }

nn::Matrix SacTrainer::q_input(const nn::Matrix& obs, const nn::Matrix& action) const {
  nn::Matrix x(obs.rows() + action.rows(), obs.cols());
  x.topRows(obs.rows()) = obs;
  x.bottomRows(action.rows()) = action;
  return x;
}

nn::Vector SacTrainer::q_targets(const ReplayBuffer::Sample& batch, Rng& rng) const {
  const nn::Index b = batch.obs.cols();
  const int adim = policy_net_.spec().action_dim;
  const nn::Matrix mean = policy_net_.forward(state_.policy, batch.next_obs);
  const nn::Vector log_std = policy_net_.log_std(state_.policy);
  nn::Matrix next_action(adim, b);
  nn::Vector next_logp(b);
  nn::Vector eps(adim);
  for (nn::Index j = 0; j < b; ++j) {
    for (int k = 0; k < adim; ++k) eps[k] = rng.normal();
    const auto s = squashed_sample(mean.col(j), log_std, eps);
    next_action.col(j) = s.action;
    next_logp[j] = s.log_prob;
  }
  const nn::Matrix xin = q_input(batch.next_obs, next_action);
  const nn::Matrix q1 = q_net_.forward(state_.q1_target, xin);
  const nn::Matrix q2 = q_net_.forward(state_.q2_target, xin);
  const double a = alpha();
  nn::Vector y(b);
  for (nn::Index j = 0; j < b; ++j) {
    y[j] = soft_q_target(batch.reward[j], batch.done[j], config_.gamma, q1(0, j), q2(0, j), a, next_logp[j]);
  }
  return y;
}

SacLosses SacTrainer::critic_update(const ReplayBuffer::Sample& batch) {
  SacLosses out;
  const nn::Vector y = q_targets(batch, rng_);
  const nn::Matrix xin = q_input(batch.obs, batch.action);
  auto step_q = [&](nn::Vector& params, nn::Adam& opt) {
    nn::Trace trace;
    const nn::Matrix q = q_net_.forward(params, xin, &trace);
    const auto g = nn::value_mse(q, y);
    nn::Vector grad = nn::Vector::Zero(q_net_.parameter_count());
    q_net_.backward(params, trace, {g.d_value}, grad);
    opt.step(params, grad, config_.learning_rate);
    return g.loss;
  };
  out.q1_loss = step_q(state_.q1, state_.q1_opt);
  out.q2_loss = step_q(state_.q2, state_.q2_opt);
  soft_update(state_.q1_target, state_.q1, config_.tau);
  soft_update(state_.q2_target, state_.q2, config_.tau);
  out.alpha = alpha();
  return out;
}

SacLosses SacTrainer::actor_update(const ReplayBuffer::Sample& batch) {
  SacLosses out;
  const nn::Index b = batch.obs.cols();
  const int adim = policy_net_.spec().action_dim;
  const double a = alpha();
  const double inv_b = 1.0 / static_cast<double>(b);

  nn::Trace ptrace;
  const nn::Matrix mean = policy_net_.forward(state_.policy, batch.obs, &ptrace);
  const nn::Vector log_std = policy_net_.log_std(state_.policy);
  const nn::Vector sigma = log_std.array().exp().matrix();
  nn::Matrix eps(adim, b), act(adim, b);
  nn::Vector logp(b);
  for (nn::Index j = 0; j < b; ++j) {
    for (int k = 0; k < adim; ++k) eps(k, j) = rng_.normal();
    const auto s = squashed_sample(mean.col(j), log_std, eps.col(j));
    act.col(j) = s.action;
    logp[j] = s.log_prob;
  }

  const nn::Matrix xin = q_input(batch.obs, act);
  nn::Trace t1, t2;
  const nn::Matrix q1 = q_net_.forward(state_.q1, xin, &t1);
  const nn::Matrix q2 = q_net_.forward(state_.q2, xin, &t2);
  nn::Matrix d1 = nn::Matrix::Zero(1, b), d2 = nn::Matrix::Zero(1, b);
  double qmin_sum = 0.0;
  for (nn::Index j = 0; j < b; ++j) {
    if (q1(0, j) <= q2(0, j)) {
      d1(0, j) = 1.0;
      qmin_sum += q1(0, j);
    } else {
      d2(0, j) = 1.0;
      qmin_sum += q2(0, j);
    }
  }
  // dQ_min/d(action) per sample, from whichever critic was the minimum.
  nn::Vector scratch = nn::Vector::Zero(q_net_.parameter_count());
  std::vector<nn::Matrix> din1, din2;
  q_net_.backward(state_.q1, t1, {d1}, scratch, &din1);
  q_net_.backward(state_.q2, t2, {d2}, scratch, &din2);
  const nn::Matrix dq_da = din1.front().bottomRows(adim) + din2.front().bottomRows(adim);

  nn::Matrix d_mean(adim, b);
  nn::Vector d_log_std = nn::Vector::Constant(adim, -a);
  for (nn::Index j = 0; j < b; ++j) {
    for (int k = 0; k < adim; ++k) {
      const double ak = act(k, j);
      const double g_u = inv_b * (a * 2.0 * ak - dq_da(k, j) * (1.0 - ak * ak));
      d_mean(k, j) = g_u;
      d_log_std[k] += g_u * sigma[k] * eps(k, j);
    }
  }
  nn::Vector pgrad = nn::Vector::Zero(policy_net_.parameter_count());
  policy_net_.backward(state_.policy, ptrace, {d_mean}, pgrad);
  pgrad.segment(*policy_net_.layout().log_std, adim) += d_log_std;
  state_.policy_opt.step(state_.policy, pgrad, config_.learning_rate);
  policy_net_.clamp_parameters(state_.policy);

  const double mean_logp = logp.mean();
  nn::Vector la(1), lg(1);
  la[0] = state_.log_alpha;
  lg[0] = -(mean_logp + target_entropy());
  state_.alpha_opt.step(la, lg, config_.learning_rate);
  state_.log_alpha = la[0];

  out.policy_loss = a * mean_logp - qmin_sum * inv_b;
  out.alpha_loss = -state_.log_alpha * (mean_logp + target_entropy());
  out.alpha = alpha();
  out.entropy = -mean_logp;
  if (!std::isfinite(out.policy_loss)) throw Error("SAC policy loss became non-finite");
  return out;
}

void SacTrainer::train(const std::function<void(const MetricRecord&)>& on_update, const std::string& replay_path) {
  std::vector<SwarmEnv> envs = make_envs(env_, task_, config_.instances, mix_seed(config_.seed, 1));
  Rng act_rng(mix_seed(config_.seed, 2));
  const auto t0 = std::chrono::steady_clock::now();
  const int adim = policy_net_.spec().action_dim;
  int total = 0;
  for (const auto& e : envs) total += e.agent_count();
  std::vector<double> running(static_cast<std::size_t>(total), 0.0);
  std::vector<double> window;
  double q_sum = 0.0, pl_sum = 0.0, ent_sum = 0.0;
  std::int64_t q_n = 0, pl_n = 0, ent_n = 0;
  std::int64_t lockstep = 0;
  std::int64_t next_summary = state_.steps + config_.summary_interval;
  std::int64_t rows = 0;

  std::vector<nn::Matrix> obs(envs.size());
  for (std::size_t w = 0; w < envs.size(); ++w) obs[w] = envs[w].observe();

  while (state_.steps < config_.total_steps) {
    int col = 0;
    for (std::size_t w = 0; w < envs.size(); ++w) {
      SwarmEnv& env = envs[w];
      const nn::Matrix mean = policy_net_.forward(state_.policy, obs[w]);
      const nn::Vector log_std = policy_net_.log_std(state_.policy);
      const int count = env.agent_count();
      nn::Matrix act(adim, count);
      std::vector<Vec3> world_actions(static_cast<std::size_t>(count));
      nn::Vector eps(adim);
      for (int a = 0; a < count; ++a) {
        for (int k = 0; k < adim; ++k) eps[k] = act_rng.normal();
        const auto s = squashed_sample(mean.col(a), log_std, eps);
        act.col(a) = s.action;
        ent_sum += -s.log_prob;
        ++ent_n;
        for (int k = 0; k < 3; ++k) world_actions[static_cast<std::size_t>(a)][k] = env.world().config.max_action * s.action[k];
      }
      EnvStep r = env.step(world_actions);
      nn::Matrix next = r.episode_end ? r.final_observation : env.observe();
      for (int a = 0; a < count; ++a) {
        const double sig = r.rewards.signal[static_cast<std::size_t>(a)];
        replay_.add(obs[w].col(a), act.col(a), sig, next.col(a), false);
        running[static_cast<std::size_t>(col + a)] += sig;
        if (r.episode_end) {
          window.push_back(running[static_cast<std::size_t>(col + a)]);
          running[static_cast<std::size_t>(col + a)] = 0.0;
        }
      }
      obs[w] = r.episode_end ? env.observe() : std::move(next);
      state_.steps += count;
      col += count;
    }
    ++lockstep;

    const bool warm = replay_.inserted() >= config_.warmup_transitions() && replay_.size() >= config_.batch_size;
    if (warm && lockstep % config_.steps_per_update == 0) {
      for (int u = 0; u < config_.reward_signal_updates; ++u) {
        const auto l = critic_update(replay_.sample(config_.batch_size, rng_));
        q_sum += 0.5 * (l.q1_loss + l.q2_loss);
        ++q_n;
      }
      const auto l = actor_update(replay_.sample(config_.batch_size, rng_));
      pl_sum += l.policy_loss;
      ++pl_n;
      ++state_.updates;
    }

    if (state_.steps >= next_summary || state_.steps >= config_.total_steps) {
      MetricRecord m;
      m.update = ++rows;
      m.steps = state_.steps;
      m.mcr = window.empty() ? std::nan("")
                             : std::accumulate(window.begin(), window.end(), 0.0) / static_cast<double>(window.size());
      m.vl = q_n ? q_sum / static_cast<double>(q_n) : std::nan("");
      m.pl = pl_n ? pl_sum / static_cast<double>(pl_n) : std::nan("");
      m.entropy = ent_n ? ent_sum / static_cast<double>(ent_n) : std::nan("");
      m.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (on_update) on_update(m);
      window.clear();
      q_sum = pl_sum = ent_sum = 0.0;
      q_n = pl_n = ent_n = 0;
      while (next_summary <= state_.steps) next_summary += config_.summary_interval;
    }
  }
  if (config_.save_replay_buffer && !replay_path.empty()) replay_.save(replay_path);
}

PolicyModel SacTrainer::policy_model() const { return {policy_net_.spec(), state_.policy, ActionSquash::tanh}; }

json SacTrainer::checkpoint() const {
  auto net = [&](const nn::Vector& p) { return json{{"spec", q_net_.spec()}, {"params", nn::vector_to_json(p)}}; };
  return json{{"format", "swarmnav-checkpoint"},
              {"version", 1},
              {"algo", "sac"},
              {"env", env_},
              {"task", task_},
              {"config", config_},
              {"policy", policy_model()},
              {"q1", net(state_.q1)},
              {"q2", net(state_.q2)},
              {"q1_target", net(state_.q1_target)},
              {"q2_target", net(state_.q2_target)},
              {"log_alpha", state_.log_alpha},
              {"policy_opt", state_.policy_opt},
              {"q1_opt", state_.q1_opt},
              {"q2_opt", state_.q2_opt},
              {"alpha_opt", state_.alpha_opt},
              {"steps", state_.steps},
              {"updates", state_.updates}};
}

void SacTrainer::restore(const json& j) {
  if (j.value("algo", std::string()) != "sac") throw ConfigError("checkpoint is not a SAC checkpoint");
  const PolicyModel pm = j.at("policy").get<PolicyModel>();
  if (!(pm.spec == policy_net_.spec())) throw ConfigError("checkpoint policy spec does not match the trainer");
  auto net = [&](const char* key) {
    if (!(j.at(key).at("spec").get<nn::NetworkSpec>() == q_net_.spec())) {
      throw ConfigError(std::string("checkpoint ") + key + " spec does not match the trainer");
    }
    return nn::vector_from_json(j.at(key).at("params"));
  };
  state_.policy = pm.params;
  state_.q1 = net("q1");
  state_.q2 = net("q2");
  state_.q1_target = net("q1_target");
  state_.q2_target = net("q2_target");
  state_.log_alpha = j.at("log_alpha").get<double>();
  state_.policy_opt = j.at("policy_opt").get<nn::Adam>();
  state_.q1_opt = j.at("q1_opt").get<nn::Adam>();
  state_.q2_opt = j.at("q2_opt").get<nn::Adam>();
  state_.alpha_opt = j.at("alpha_opt").get<nn::Adam>();
  state_.steps = j.at("steps").get<std::int64_t>();
  state_.updates = j.at("updates").get<std::int64_t>();
}

}  // namespace swarmnav
