#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "swarmnav/checkpoint.hpp"
#include "swarmnav/error.hpp"
#include "swarmnav/harness.hpp"
#include "swarmnav/nn.hpp"
#include "swarmnav/rng.hpp"
#include "swarmnav/scenario.hpp"
#include "swarmnav/session.hpp"

using namespace swarmnav;
using nlohmann::json;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("swarmnav_io_" + name);
}

RunStats stats_from(const std::vector<double>& dist, const std::vector<int>& comps) {
  RunStats s;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    s.min_distance.push_back(dist[i]);
    s.tracking.push_back(dist[i] <= 0.0 ? 1 : 0);
    s.formation.push_back(0);
    const int c = i < comps.size() ? comps[i] : 1;
    s.components.push_back(c);
    s.component_sizes.push_back(c == 2 ? std::vector<int>{4, 4} : std::vector<int>{8});
    s.region_occupancy.push_back(0);
    s.mean_signal.push_back(0.0);
  }
  return s;
}

}  // namespace

TEST(Io, CommandJsonRoundTrip) {
  Command c;
  c.kind = CommandKind::move_target;
  c.target_id = 3;
  c.position = Vec3{1.5, 2.25, -0.125};
  const json j = c;
  EXPECT_EQ(j.at("type"), "move_target");
  EXPECT_EQ(j.get<Command>(), c);

  Command r;
  r.kind = CommandKind::reset;
  r.seed = 99;
  EXPECT_EQ(json(r).get<Command>(), r);

  Command s;
  s.kind = CommandKind::set_speed;
  s.speed = 2.5;
  EXPECT_EQ(json(s).get<Command>(), s);
}

TEST(Io, CommandParsingRejectsBadInput) {
  EXPECT_THROW(json::parse(R"({"type":"fly"})").get<Command>(), CommandError);
  EXPECT_THROW(json::parse(R"({"type":"move_target","id":0})").get<Command>(), CommandError);
  EXPECT_THROW(json::parse(R"({"type":"move_target","id":0,"pos":[1,2]})").get<Command>(), CommandError);
  EXPECT_THROW(json::parse(R"({"type":"set_speed","speed":0})").get<Command>(), CommandError);
  EXPECT_THROW(json::parse(R"({"type":"reset","seed":-1})").get<Command>(), CommandError);
  EXPECT_THROW(json::parse(R"([1,2,3])").get<Command>(), CommandError);
}

TEST(Io, EveryExperimentScenarioRoundTrips) {
  for (const auto& id : experiment_ids()) {
    for (const auto& s : build_experiment(id)) {
      const json j = s;
      const Scenario back = j.get<Scenario>();
      EXPECT_EQ(back, s) << id;
      EXPECT_EQ(json(back).dump(), j.dump()) << id;
    }
  }
}

TEST(Io, ScenarioFileRoundTrip) {
  const Scenario s = build_experiment("5b").front();
  const auto path = temp_file("scenario.json");
  save_scenario(s, path.string());
  EXPECT_EQ(load_scenario(path.string()), s);
  std::filesystem::remove(path);
  EXPECT_THROW(load_scenario(path.string()), Error);
}

TEST(Io, UnknownPredicateKindRejected) {
  json j = build_experiment("1a").front();
  j["predicate"]["kind"] = "teleport";
  EXPECT_THROW(j.get<Scenario>(), ConfigError);
}

TEST(Io, CheckpointDoublesRoundTripExactly) {
  const nn::Network net(nn::NetworkSpec::preset("default", nn::Head::policy, 5));
  Rng rng(11);
  const nn::Vector params = net.initialize(rng);
  json ck{{"format", "swarmnav-checkpoint"}, {"version", 1}, {"algo", "ppo"}};
  ck["values"] = std::vector<double>(params.data(), params.data() + params.size());
  ck["awkward"] = {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.30000000000000004};
  const auto path = temp_file("ck.json");
  save_checkpoint(ck, path.string());
  const json back = load_checkpoint(path.string());
  const auto a = ck["values"].get<std::vector<double>>();
  const auto b = back["values"].get<std::vector<double>>();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
  const auto x = back["awkward"].get<std::vector<double>>();
  EXPECT_EQ(x[1], 1.0 / 3.0);
  EXPECT_EQ(x[2], 1e-300);
  EXPECT_EQ(x[4], 0.30000000000000004);
  std::filesystem::remove(path);
}

TEST(Io, CheckpointWithWrongFormatRejected) {
  const auto path = temp_file("bad.json");
  std::ofstream(path) << R"({"format":"something-else","version":1})";
  EXPECT_THROW(load_checkpoint(path.string()), Error);
  std::filesystem::remove(path);
}

TEST(Predicates, ReachLabels) {
  Predicate p;
  p.kind = "reach";
  p.window = 3;
  EXPECT_EQ(evaluate_predicate(p, stats_from({5, 4, 3, 0, 0}, {})).label, "reached");
  // No progress during the final window.
  EXPECT_EQ(evaluate_predicate(p, stats_from({5, 4, 3, 3, 3.5, 3}, {})).label, "stalled");
  EXPECT_EQ(evaluate_predicate(p, stats_from({5, 4, 3, 2.5, 2, 1.5}, {})).label, "moving");
  p.expect = "stalled";
  EXPECT_TRUE(evaluate_predicate(p, stats_from({5, 4, 3, 3, 3, 3}, {})).pass);
}

TEST(Predicates, IslandCycle) {
  Predicate p;
  p.kind = "island_cycle";
  auto s = stats_from(std::vector<double>(8, 1.0), {1, 1, 2, 2, 2, 1, 1, 1});
  Verdict v = evaluate_predicate(p, s);
  EXPECT_EQ(v.label, "split_merge");
  EXPECT_TRUE(v.pass);
  EXPECT_EQ(v.details["split_step"], 3);
  EXPECT_EQ(v.details["merge_step"], 6);
  EXPECT_EQ(evaluate_predicate(p, stats_from(std::vector<double>(4, 1.0), {1, 1, 1, 1})).label, "no_split");
  EXPECT_EQ(evaluate_predicate(p, stats_from(std::vector<double>(4, 1.0), {1, 2, 2, 2})).label, "no_merge");
  auto u = s;
  for (auto& sz : u.component_sizes) {
    if (sz.size() == 2) sz = {2, 6};
  }
  EXPECT_EQ(evaluate_predicate(p, u).label, "unbalanced");
}

TEST(Predicates, SingleFileAndOthers) {
  Predicate p;
  p.kind = "single_file";
  auto s = stats_from({3, 2, 0}, {});
  s.region_occupancy = {0, 1, 0};
  EXPECT_EQ(evaluate_predicate(p, s).label, "single_file");
  s.region_occupancy = {0, 2, 0};
  EXPECT_EQ(evaluate_predicate(p, s).label, "crowded");

  p.kind = "avoid";
  s.destroyed = 1;
  EXPECT_EQ(evaluate_predicate(p, s).label, "collided");
  p.kind = "stable_flight";
  EXPECT_EQ(evaluate_predicate(p, s).label, "crashed");
  s.destroyed = 0;
  EXPECT_EQ(evaluate_predicate(p, s).label, "stable_flight");

  p.kind = "one_swarm";
  EXPECT_EQ(evaluate_predicate(p, s).label, "one_swarm");
  s.components.back() = 2;
  EXPECT_EQ(evaluate_predicate(p, s).label, "fragmented");

  p.kind = "tracking";
  p.window = 2;
  p.fraction = 0.5;
  EXPECT_EQ(evaluate_predicate(p, s).label, "tracking");
  p.fraction = 0.6;
  EXPECT_EQ(evaluate_predicate(p, s).label, "lost");

  p.kind = "nonsense";
  EXPECT_THROW(evaluate_predicate(p, s), ConfigError);
}
