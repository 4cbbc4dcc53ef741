#include <filesystem>

#include <gtest/gtest.h>

#include "swarmnav/checkpoint.hpp"
#include "swarmnav/error.hpp"
#include "swarmnav/harness.hpp"
#include "swarmnav/rng.hpp"

using namespace swarmnav;
using nlohmann::json;

namespace {

// Agents start in one corner, the target sits in the opposite one.
Scenario far_target_smoke() {
  Scenario s = smoke_scenario();
  s.env.target_count = 1;
  s.env.target_positions = {{18, 18, 18}};
  s.env.agent_spawn_region = Aabb{{3, 3, 3}, {2, 2, 2}};
  s.duration = 300;
  s.env.episode_length = 300;
  s.predicate.window = 300;
  return s;
}

}  // namespace

TEST(Harness, ExperimentIdsAreKnown) {
  const auto& ids = experiment_ids();
  EXPECT_EQ(ids.size(), 10u);
  for (const auto& id : ids) EXPECT_FALSE(build_experiment(id).empty());
  EXPECT_EQ(build_experiment("3").size(), 2u);
  EXPECT_THROW(build_experiment("9z"), ConfigError);
}

TEST(Harness, ScenariosValidate) {
  for (const auto& id : experiment_ids()) {
    for (const auto& s : build_experiment(id)) EXPECT_NO_THROW(s.validate()) << s.name;
  }
  EXPECT_NO_THROW(smoke_scenario().validate());
}

class OracleExperiment : public ::testing::TestWithParam<std::string> {};

TEST_P(OracleExperiment, PassesItsPredicate) {
  for (const auto& run : run_experiment(GetParam(), "oracle", kDefaultExperimentSeed)) {
    EXPECT_TRUE(run.verdict.pass) << run.scenario.name << ": " << run.verdict.label << " " << run.verdict.details.dump();
  }
}

INSTANTIATE_TEST_SUITE_P(All, OracleExperiment,
                         ::testing::Values("1a", "1b", "2", "3", "4", "5a", "5b", "6a", "6b", "6c"));

TEST(Harness, ExperimentThreeContrast) {
  const auto runs = run_experiment("3", "oracle", kDefaultExperimentSeed);
  ASSERT_EQ(runs.size(), 2u);
  EXPECT_EQ(runs[0].scenario.task.metric, DistanceMetric::euclidean);
  EXPECT_EQ(runs[0].verdict.label, "stalled");
  EXPECT_EQ(runs[1].scenario.task.metric, DistanceMetric::geodesic);
  EXPECT_EQ(runs[1].verdict.label, "reached");
}

TEST(Harness, SingleFilePassage) {
  const auto runs = run_experiment("4", "oracle", kDefaultExperimentSeed);
  ASSERT_EQ(runs.size(), 1u);
  EXPECT_LE(runs[0].verdict.details.at("max_in_region").get<int>(), 1);
  EXPECT_GT(runs[0].verdict.details.at("passages").get<int>(), 0);
}

TEST(Harness, LogShapeAndReplay) {
  const auto runs = run_experiment("4", "oracle", kDefaultExperimentSeed);
  const auto& log = runs[0].log;
  ASSERT_GE(log.size(), 3u);
  EXPECT_EQ(json::parse(log.front()).at("type"), "header");
  EXPECT_EQ(json::parse(log.back()).at("type"), "verdict");
  std::int64_t steps = 0;
  for (const auto& l : log) steps += json::parse(l).at("type") == "step";
  EXPECT_EQ(steps, runs[0].scenario.duration);

  const ReplayResult r = replay_log(log);
  EXPECT_EQ(r.runs, 1);
  EXPECT_TRUE(r.identical) << r.mismatch;

  auto tampered = log;
  json mid = json::parse(tampered[tampered.size() / 2]);
  mid["agents"][0]["pos"][0] = mid["agents"][0]["pos"][0].get<double>() + 1e-9;
  tampered[tampered.size() / 2] = mid.dump();
  EXPECT_FALSE(replay_log(tampered).identical);
}

TEST(Harness, ScriptedCommandsReplay) {
  const auto runs = run_experiment("5b", "oracle", kDefaultExperimentSeed);
  std::int64_t commands = 0;
  for (const auto& l : runs[0].log) commands += json::parse(l).at("type") == "command";
  EXPECT_EQ(commands, static_cast<std::int64_t>(runs[0].scenario.script.size()));
  EXPECT_TRUE(replay_log(runs[0].log).identical);
}

TEST(Harness, RunsAreDeterministic) {
  const auto a = run_experiment("1b", "oracle", 3);
  const auto b = run_experiment("1b", "oracle", 3);
  EXPECT_EQ(a[0].log, b[0].log);
  const auto c = run_experiment("1b", "oracle", 4);
  EXPECT_NE(a[0].log, c[0].log);
}

TEST(Harness, EvaluateDeterministicAndSeeded) {
  const Scenario s = far_target_smoke();
  const EvalSummary a = evaluate("oracle", s, 2, 5);
  const EvalSummary b = evaluate("oracle", s, 2, 5);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  ASSERT_EQ(a.episodes.size(), 2u);
  EXPECT_EQ(a.episodes[0].seed, mix_seed(5, 0));
  EXPECT_EQ(a.episodes[1].seed, mix_seed(5, 1));

  MemoryLog record;
  evaluate("oracle", s, 2, 5, &record);
  const ReplayResult r = replay_log(record.lines);
  EXPECT_EQ(r.runs, 2);
  EXPECT_TRUE(r.identical) << r.mismatch;
}

TEST(Harness, ZeroPolicyNeverTracks) {
  const EvalSummary z = evaluate("zero", far_target_smoke(), 2, 1);
  EXPECT_EQ(z.mean_tracking, 0.0);
  EXPECT_EQ(z.destroyed, 0);
}

TEST(Harness, OracleTracks) {
  const EvalSummary o = evaluate("oracle", far_target_smoke(), 3, 1);
  EXPECT_GT(o.mean_tracking, 0.6);
  EXPECT_EQ(o.destroyed, 0);
  for (const auto& e : o.episodes) EXPECT_TRUE(e.verdict.pass) << e.verdict.details.dump();
}

TEST(Harness, UnknownPolicyRejected) {
  EXPECT_THROW(make_policy("random"), ConfigError);
  EXPECT_THROW(make_policy("model:/nonexistent/checkpoint.json"), ConfigError);
}

TEST(Harness, TrainWritesUsableCheckpoint) {
  const auto dir = std::filesystem::temp_directory_path() / "swarmnav_harness_train";
  std::filesystem::remove_all(dir);
  TrainOptions o;
  o.algo = "ppo";
  o.steps = 2048;
  o.instances = 1;
  o.seed = 2;
  o.out_dir = dir.string();
  o.overrides = {{"time_horizon", 64}, {"batch_size", 128}, {"buffer_size", 512}};
  int seen = 0;
  const TrainResult r = train(smoke_scenario(), o, [&](const MetricRecord&) { ++seen; });
  EXPECT_EQ(seen, static_cast<int>(r.metrics.size()));
  EXPECT_GT(seen, 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "metrics.csv"));
  const auto ck_path = (dir / "checkpoint.json").string();
  const json ck = load_checkpoint(ck_path);
  EXPECT_EQ(ck.at("algo"), "ppo");
  EXPECT_NO_THROW(policy_model_from_checkpoint(ck));

  Scenario short_run = smoke_scenario();
  short_run.duration = 50;
  const EvalSummary e = evaluate("model:" + ck_path, short_run, 1, 0);
  EXPECT_EQ(e.episodes.size(), 1u);
  std::filesystem::remove_all(dir);
}

TEST(Harness, TrainRejectsBadOptions) {
  TrainOptions o;
  o.algo = "dqn";
  EXPECT_THROW(train(smoke_scenario(), o), ConfigError);
  o.algo = "ppo";
  o.preset = "huge";
  EXPECT_THROW(train(smoke_scenario(), o), ConfigError);
}
