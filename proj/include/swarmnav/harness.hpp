#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmnav/metrics.hpp"
#include "swarmnav/scenario.hpp"
#include "swarmnav/session.hpp"

namespace swarmnav {

inline constexpr std::uint64_t kDefaultExperimentSeed = 7;

/// Ids accepted by build_experiment, in order.
const std::vector<std::string>& experiment_ids();

/// Scripted scenarios for one experiment id. "3" yields the Euclidean run
/// followed by the geodesic run; every other id yields one scenario.
std::vector<Scenario> build_experiment(const std::string& id);

/// Empty 20-unit arena, four agents, one static target: the small training
/// task used for quick end-to-end runs.
Scenario smoke_scenario();

struct ExperimentRun {
  Scenario scenario;
  Verdict verdict;
  std::vector<std::string> log;  // trajectory log lines
};

/// Runs every scenario of an experiment with a fresh policy built from
/// `policy_label` and the given seed.
std::vector<ExperimentRun> run_experiment(const std::string& id, const std::string& policy_label, std::uint64_t seed);

struct EpisodeSummary {
  std::uint64_t seed = 0;
  double cumulative_reward = 0.0;  // per-agent signal summed over the episode, averaged over agents
  double formation_fraction = 0.0;
  double tracking_fraction = 0.0;
  std::int64_t destroyed = 0;
  Verdict verdict;
};

struct EvalSummary {
  std::vector<EpisodeSummary> episodes;
  double mean_reward = 0.0;
  double mean_formation = 0.0;
  double mean_tracking = 0.0;
  std::int64_t destroyed = 0;
};

nlohmann::json to_json(const EvalSummary& s);

/// Runs `episodes` sessions of the scenario, episode e seeded with
/// mix_seed(seed, e). Each session is written to `record` when given.
/// A model policy must match the scenario's observation layout.
EvalSummary evaluate(const std::string& policy_label, const Scenario& scenario, int episodes, std::uint64_t seed,
                     LogSink* record = nullptr);

struct ReplayResult {
  int runs = 0;
  bool identical = true;
  std::string mismatch;  // first differing line, when not identical
};

/// Re-simulates every run in a trajectory log from its header and command
/// records and compares the produced lines with the recorded ones.
ReplayResult replay_log(const std::vector<std::string>& lines);
std::vector<std::string> read_lines(const std::string& path);

struct TrainOptions {
  std::string algo = "ppo";        // ppo | sac
  std::string preset = "default";  // default | customized
  std::int64_t steps = 0;          // 0 keeps the algorithm default
  std::uint64_t seed = 0;
  std::string out_dir;             // metrics.csv, checkpoint.json, replay.bin
  int instances = 0;               // 0 keeps the algorithm default
  int checkpoint_every = 0;        // metric rows between checkpoint saves; 0 saves only at the end
  nlohmann::json overrides = nlohmann::json::object();  // extra hyperparameters
};

struct TrainResult {
  std::vector<MetricRecord> metrics;
  nlohmann::json checkpoint;
};

/// Trains on the scenario's environment (auto reset forced on).
TrainResult train(const Scenario& scenario, const TrainOptions& options,
                  const std::function<void(const MetricRecord&)>& on_update = {});

}  // namespace swarmnav
