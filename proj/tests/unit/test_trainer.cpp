#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "swarmnav/error.hpp"
#include "swarmnav/metrics.hpp"
#include "swarmnav/trainer.hpp"

using namespace swarmnav;

namespace {

EnvConfig tiny_env(int agents = 1) {
  EnvConfig c;
  c.axis_length = 12.0;
  c.agent_count = agents;
  c.random_tick = false;
  c.episode_length = 6;
  c.seed = 4;
  return c;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("swarmnav_test_" + name);
}

}  // namespace

TEST(Gae, LambdaZeroIsOneStepResidual) {
  const std::vector<double> r{1.0, -0.5, 2.0, 0.25};
  const std::vector<double> v{0.3, 0.1, -0.2, 0.7, 0.4};
  const std::vector<int> d{0, 1, 0, 0};
  const auto g = gae(r, v, d, 0.99, 0.0);
  for (std::size_t t = 0; t < r.size(); ++t) {
    EXPECT_EQ(g.advantages[t], r[t] + 0.99 * v[t + 1] * (d[t] ? 0.0 : 1.0) - v[t]);
    EXPECT_EQ(g.returns[t], g.advantages[t] + v[t]);
  }
}

TEST(Gae, LambdaOneGammaOneSumsFutureRewards) {
  const std::vector<double> r{1.0, 2.0, 3.0, 4.0};
  const auto g = gae(r, std::vector<double>(5, 0.0), std::vector<int>(4, 0), 1.0, 1.0);
  EXPECT_EQ(g.advantages, (std::vector<double>{10.0, 9.0, 7.0, 4.0}));
}

TEST(Gae, MatchesDoubleLoopOracle) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> r(100), v(101);
    std::vector<int> d(100);
    for (auto& x : r) x = rng.normal();
    for (auto& x : v) x = rng.normal();
    for (auto& x : d) x = rng.uniform() < 0.05 ? 1 : 0;
    const double lambda = rng.uniform(), gamma = rng.uniform(0.8, 1.0);
    const auto g = gae(r, v, d, gamma, lambda);
    const auto o = oracle::gae(r, v, d, gamma, lambda);
    for (std::size_t t = 0; t < r.size(); ++t) {
      EXPECT_NEAR(g.advantages[t], o.advantages[t], 1e-10);
      EXPECT_NEAR(g.returns[t], o.returns[t], 1e-10);
    }
  }
}

TEST(Gae, LengthMismatchThrows) {
  EXPECT_THROW(gae({1.0}, {0.0}, {0}, 0.99, 0.9), ContractError);
}

TEST(Trainer, NormalizeMoments) {
  Rng rng(1);
  std::vector<double> v(10240);
  for (auto& x : v) x = 5 + 3 * rng.normal();
  normalize(v);
  double m = 0, s = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  for (double x : v) s += (x - m) * (x - m);
  s = std::sqrt(s / static_cast<double>(v.size()));
  EXPECT_LT(std::abs(m), 1e-6);
  EXPECT_NEAR(s, 1.0, 1e-6);
}

TEST(Trainer, LinearDecay) {
  EXPECT_DOUBLE_EQ(linear_decay(7e-4, 0, 1000), 7e-4);
  EXPECT_DOUBLE_EQ(linear_decay(7e-4, 250, 1000), 7e-4 * 0.75);
  EXPECT_DOUBLE_EQ(linear_decay(7e-4, 1000, 1000), 0.0);
  EXPECT_DOUBLE_EQ(linear_decay(7e-4, 2000, 1000), 0.0);
}

TEST(Trainer, RolloutCountsAndSegments) {
  TaskConfig task;
  RolloutCollector col(make_envs(tiny_env(1), task, 1, 3), 5);
  const nn::Network pol(nn::NetworkSpec::preset("default", nn::Head::policy, task.observation.width()));
  Rng init(1);
  const nn::Vector p = pol.initialize(init);
  RolloutBatch b = col.collect(pol, p, nullptr, nullptr, 4);
  EXPECT_EQ(b.size(), 4);
  EXPECT_EQ(b.obs.cols(), 4);

  // 2 instances x 3 agents x horizon 8 crosses one episode boundary (length 6).
  RolloutCollector col2(make_envs(tiny_env(3), task, 2, 3), 5);
  RolloutBatch c = col2.collect(pol, p, nullptr, nullptr, 8);
  EXPECT_EQ(c.size(), 2 * 3 * 8);
  EXPECT_EQ(c.completed_returns.size(), 6u);
  std::int64_t covered = 0;
  for (const auto& s : c.segments) covered += s.length;
  EXPECT_EQ(covered, c.size());
  c.compute_advantages(0.99, 0.96);
  EXPECT_EQ(c.advantages.size(), static_cast<std::size_t>(c.size()));
}

TEST(Trainer, CollectionIsDeterministic) {
  TaskConfig task;
  const nn::Network pol(nn::NetworkSpec::preset("default", nn::Head::policy, task.observation.width()));
  Rng init(1);
  const nn::Vector p = pol.initialize(init);
  RolloutCollector a(make_envs(tiny_env(2), task, 2, 9), 5), b(make_envs(tiny_env(2), task, 2, 9), 5);
  const RolloutBatch x = a.collect(pol, p, nullptr, nullptr, 10);
  const RolloutBatch y = b.collect(pol, p, nullptr, nullptr, 10);
  EXPECT_EQ(x.obs, y.obs);
  EXPECT_EQ(x.actions, y.actions);
  EXPECT_EQ(x.reward, y.reward);
  EXPECT_EQ(x.log_prob, y.log_prob);
}

TEST(Metrics, EmptyStreamIsHeaderOnly) {
  const auto path = temp_file("empty.csv");
  { MetricsSink sink(path.string()); }
  std::ifstream in(path);
  std::string line, all;
  int lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    all = line;
  }
  EXPECT_EQ(lines, 1);
  EXPECT_EQ(all, kMetricsHeader);
  EXPECT_TRUE(read_metrics(path.string()).empty());
}

TEST(Metrics, RoundTripExact) {
  const auto path = temp_file("two.csv");
  std::vector<MetricRecord> rows{{1, 10240, 241.894463204466, 131.55971458759112, -0.0019396013006239827, 1.42, 0.1},
                                 {2, 20480, std::nan(""), 1.0 / 3.0, 2e-300, -0.5, 0.2}};
  {
    MetricsSink sink(path.string());
    for (const auto& r : rows) sink.write(r);
  }
  const auto back = read_metrics(path.string());
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].update, rows[i].update);
    EXPECT_EQ(back[i].steps, rows[i].steps);
    if (std::isnan(rows[i].mcr)) {
      EXPECT_TRUE(std::isnan(back[i].mcr));
    } else {
      EXPECT_EQ(back[i].mcr, rows[i].mcr);
    }
    EXPECT_EQ(back[i].vl, rows[i].vl);
    EXPECT_EQ(back[i].pl, rows[i].pl);
    EXPECT_EQ(back[i].entropy, rows[i].entropy);
    EXPECT_EQ(back[i].wall_s, rows[i].wall_s);
  }
}
