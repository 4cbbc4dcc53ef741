#include "swarmnav/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "swarmnav/error.hpp"

namespace swarmnav {

GaeResult gae(const std::vector<double>& rewards, const std::vector<double>& values, const std::vector<int>& dones,
              double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n + 1 || dones.size() != n) throw ContractError("gae: sequence lengths do not align");
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double live = dones[k] ? 0.0 : 1.0;
    const double delta = rewards[k] + gamma * values[k + 1] * live - values[k];
    next = delta + gamma * lambda * live * next;
    out.advantages[k] = next;
    out.returns[k] = next + values[k];
  }
  return out;
}

void normalize(std::vector<double>& v) {
  if (v.empty()) return;
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / n);
  for (double& x : v) x = (x - mean) / (sd + 1e-12);
}

double linear_decay(double lr0, std::int64_t steps, std::int64_t total_steps) {
  if (total_steps <= 0) return lr0;
  const double f = static_cast<double>(steps) / static_cast<double>(total_steps);
  return lr0 * std::max(0.0, 1.0 - f);
}

void RolloutBatch::compute_advantages(double gamma, double lambda) {
  advantages.assign(reward.size(), 0.0);
  returns.assign(reward.size(), 0.0);
  for (const auto& s : segments) {
    const auto b = static_cast<std::size_t>(s.start);
    const auto e = b + static_cast<std::size_t>(s.length);
    std::vector<double> r(reward.begin() + static_cast<long>(b), reward.begin() + static_cast<long>(e));
    std::vector<double> v(value.begin() + static_cast<long>(b), value.begin() + static_cast<long>(e));
    v.push_back(s.bootstrap_value);
    const auto g = gae(r, v, std::vector<int>(r.size(), 0), gamma, lambda);
    std::copy(g.advantages.begin(), g.advantages.end(), advantages.begin() + static_cast<long>(b));
    std::copy(g.returns.begin(), g.returns.end(), returns.begin() + static_cast<long>(b));
  }
}

namespace {

void append_cols(nn::Matrix& dst, const nn::Matrix& src) {
  if (src.size() == 0) return;
  if (dst.size() == 0) {
    dst = src;
    return;
  }
  const auto old = dst.cols();
  dst.conservativeResize(src.rows(), old + src.cols());
  dst.rightCols(src.cols()) = src;
}

template <class T>
void append_vec(std::vector<T>& dst, const std::vector<T>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

}  // namespace

void RolloutBatch::append(const RolloutBatch& o) {
  const std::int64_t offset = size();
  append_cols(obs, o.obs);
  append_cols(actions, o.actions);
  append_cols(memory_h, o.memory_h);
  append_cols(memory_c, o.memory_c);
  append_vec(log_prob, o.log_prob);
  append_vec(reward, o.reward);
  append_vec(value, o.value);
  append_vec(advantages, o.advantages);
  append_vec(returns, o.returns);
  append_vec(completed_returns, o.completed_returns);
  for (auto s : o.segments) {
    s.start += offset;
    segments.push_back(s);
  }
}

std::vector<SwarmEnv> make_envs(const EnvConfig& env, const TaskConfig& task, int count, std::uint64_t seed) {
  if (count < 1) throw ConfigError("need at least one simulation instance");
  std::vector<SwarmEnv> envs;
  envs.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    EnvConfig c = env;
    c.seed = mix_seed(seed, static_cast<std::uint64_t>(i));
    envs.emplace_back(c, task);
  }
  return envs;
}

RolloutCollector::RolloutCollector(std::vector<SwarmEnv> envs, std::uint64_t seed)
    : envs_(std::move(envs)), rng_(seed) {
  running_return_.assign(static_cast<std::size_t>(agents_total()), 0.0);
}

int RolloutCollector::agents_total() const {
  int n = 0;
  for (const auto& e : envs_) n += e.agent_count();
  return n;
}

RolloutBatch RolloutCollector::collect(const nn::Network& policy, const nn::Vector& policy_params,
                                       const nn::Network* value, const nn::Vector* value_params, int horizon) {
  if (horizon < 1) throw ContractError("horizon must be positive");
  const int total = agents_total();
  const int width = envs_.front().observation_width();
  const int adim = policy.spec().action_dim;
  const bool recurrent = policy.spec().recurrent();
  if (recurrent && memory_.h.cols() != total) memory_ = policy.zero_memory(total);
  const nn::Vector log_std = policy.log_std(policy_params);

  std::vector<nn::Matrix> step_obs, step_act, step_h, step_c;
  std::vector<std::vector<double>> step_logp, step_rew, step_val;
  std::vector<int> seg_begin(static_cast<std::size_t>(total), 0);
  struct Cut {
    int col, begin, end;
    double bootstrap;
  };
  std::vector<Cut> cuts;
  RolloutBatch batch;

  auto values_of = [&](const nn::Matrix& x) {
    if (!value) return nn::Matrix(nn::Matrix::Zero(1, x.cols()));
    return value->forward(*value_params, x);
  };

  nn::Matrix x(width, total);
  for (int t = 0; t < horizon; ++t) {
    int col = 0;
    for (auto& env : envs_) {
      nn::Matrix o = env.observe();
      x.middleCols(col, o.cols()) = o;
      col += static_cast<int>(o.cols());
    }
    if (recurrent) {
      step_h.push_back(memory_.h);
      step_c.push_back(memory_.c);
    }
    nn::Matrix mean = recurrent ? std::move(policy.forward(policy_params, {x}, &memory_, nullptr).front())
                                : policy.forward(policy_params, x);
    const nn::Matrix v = values_of(x);
    nn::Matrix act(adim, total);
    std::vector<double> logp(static_cast<std::size_t>(total));
    for (int i = 0; i < total; ++i) {
      auto s = nn::sample_action(mean.col(i), log_std, rng_);
      act.col(i) = s.action;
      logp[static_cast<std::size_t>(i)] = s.log_prob;
    }
    std::vector<double> rew(static_cast<std::size_t>(total));
    col = 0;
    for (auto& env : envs_) {
      const int a_count = env.agent_count();
      std::vector<Vec3> world_actions(static_cast<std::size_t>(a_count));
      for (int a = 0; a < a_count; ++a) {
        world_actions[static_cast<std::size_t>(a)] =
            to_world_action(act.col(col + a), ActionSquash::clip, env.world().config.max_action);
      }
      EnvStep r = env.step(world_actions);
      for (int a = 0; a < a_count; ++a) {
        const double sig = r.rewards.signal[static_cast<std::size_t>(a)];
        rew[static_cast<std::size_t>(col + a)] = sig;
        running_return_[static_cast<std::size_t>(col + a)] += sig;
      }
      if (r.episode_end) {
        const nn::Matrix vb = values_of(r.final_observation);
        for (int a = 0; a < a_count; ++a) {
          const int c = col + a;
          cuts.push_back({c, seg_begin[static_cast<std::size_t>(c)], t + 1, vb(0, a)});
          seg_begin[static_cast<std::size_t>(c)] = t + 1;
          batch.completed_returns.push_back(running_return_[static_cast<std::size_t>(c)]);
          running_return_[static_cast<std::size_t>(c)] = 0.0;
        }
        if (recurrent) {
          memory_.h.middleCols(col, a_count).setZero();
          memory_.c.middleCols(col, a_count).setZero();
        }
      }
      col += a_count;
    }
    step_obs.push_back(x);
    step_act.push_back(std::move(act));
    step_logp.push_back(std::move(logp));
    step_rew.push_back(std::move(rew));
    step_val.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  }
  {
    int col = 0;
    for (auto& env : envs_) {
      nn::Matrix o = env.observe();
      x.middleCols(col, o.cols()) = o;
      col += static_cast<int>(o.cols());
    }
    const nn::Matrix vb = values_of(x);
    for (int c = 0; c < total; ++c) {
      if (seg_begin[static_cast<std::size_t>(c)] < horizon) {
        cuts.push_back({c, seg_begin[static_cast<std::size_t>(c)], horizon, vb(0, c)});
      }
    }
  }
  std::sort(cuts.begin(), cuts.end(), [](const Cut& a, const Cut& b) {
    return a.col != b.col ? a.col < b.col : a.begin < b.begin;
  });

  const std::int64_t n = static_cast<std::int64_t>(total) * horizon;
  batch.obs.resize(width, n);
  batch.actions.resize(adim, n);
  if (recurrent) {
    batch.memory_h.resize(policy.spec().memory_width, n);
    batch.memory_c.resize(policy.spec().memory_width, n);
  }
  batch.log_prob.reserve(static_cast<std::size_t>(n));
  batch.reward.reserve(static_cast<std::size_t>(n));
  batch.value.reserve(static_cast<std::size_t>(n));
  std::vector<int> world_of(static_cast<std::size_t>(total)), agent_of(static_cast<std::size_t>(total));
  {
    int col = 0;
    for (int w = 0; w < static_cast<int>(envs_.size()); ++w) {
      for (int a = 0; a < envs_[static_cast<std::size_t>(w)].agent_count(); ++a, ++col) {
        world_of[static_cast<std::size_t>(col)] = w;
        agent_of[static_cast<std::size_t>(col)] = a;
      }
    }
  }
  std::int64_t k = 0;
  for (const auto& cut : cuts) {
    Segment s{k, cut.end - cut.begin, cut.bootstrap, world_of[static_cast<std::size_t>(cut.col)],
              agent_of[static_cast<std::size_t>(cut.col)]};
    for (int t = cut.begin; t < cut.end; ++t, ++k) {
      const auto ts = static_cast<std::size_t>(t);
      const auto cs = static_cast<std::size_t>(cut.col);
      batch.obs.col(k) = step_obs[ts].col(cut.col);
      batch.actions.col(k) = step_act[ts].col(cut.col);
      if (recurrent) {
        batch.memory_h.col(k) = step_h[ts].col(cut.col);
        batch.memory_c.col(k) = step_c[ts].col(cut.col);
      }
      batch.log_prob.push_back(step_logp[ts][cs]);
      batch.reward.push_back(step_rew[ts][cs]);
      batch.value.push_back(step_val[ts][cs]);
    }
    batch.segments.push_back(s);
  }
  return batch;
}

}  // namespace swarmnav
