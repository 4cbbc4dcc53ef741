#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmnav/env.hpp"
#include "swarmnav/policy.hpp"
#include "swarmnav/scenario.hpp"

namespace swarmnav {

inline constexpr int kLogVersion = 1;
inline constexpr int kMessageVersion = 1;

/// Per-step measurements a predicate is evaluated on.
struct RunStats {
  std::vector<double> min_distance;  // closest agent to its target (Euclidean)
  std::vector<std::uint8_t> tracking;   // every agent within D_c of its target
  std::vector<std::uint8_t> formation;  // every agent has a neighbor in [D_s, D_c]
  std::vector<int> components;
  std::vector<std::vector<int>> component_sizes;
  std::vector<int> region_occupancy;  // agents inside the predicate region
  std::vector<double> mean_signal;
  std::int64_t destroyed = 0;

  void record(const SwarmEnv& env, const EnvStep& step, const std::optional<Aabb>& region);
  std::int64_t steps() const { return static_cast<std::int64_t>(components.size()); }
  double tracking_fraction(std::int64_t first = 0) const;
  double formation_fraction(std::int64_t first = 0) const;
};

struct Verdict {
  std::string label;
  std::string expect;
  bool pass = false;
  nlohmann::json details;
};

Verdict evaluate_predicate(const Predicate& predicate, const RunStats& stats);

/// Receives trajectory log lines (one JSON document each, no newline).
class LogSink {
 public:
  virtual ~LogSink() = default;
  virtual void line(const std::string& text) = 0;
};

class MemoryLog : public LogSink {
 public:
  void line(const std::string& text) override { lines.push_back(text); }
  std::vector<std::string> lines;
};

class FileLog : public LogSink {
 public:
  explicit FileLog(const std::string& path);
  void line(const std::string& text) override;

 private:
  std::ofstream out_;
  std::string path_;
};

/// World state as broadcast to clients and written to trajectory logs.
nlohmann::json snapshot_json(const SwarmEnv& env, const std::vector<Event>& events,
                             const std::vector<IslandEvent>& island_events, bool full_rewards);

struct Rejection {
  std::size_t index = 0;  // position among the external commands of that step
  std::string message;
};

/// Outcome of one advance().
struct StepReport {
  EnvStep step;
  std::vector<Command> applied;
  std::vector<Rejection> rejected;
};

/// One scenario run: applies scripted and external commands at step
/// boundaries, queries the policy, steps the env and logs everything.
class Session {
 public:
  Session(Scenario scenario, std::uint64_t seed, std::unique_ptr<Policy> policy, std::string policy_label,
          LogSink* log = nullptr);

  /// External command, applied at the next step boundary after scripted ones.
  void enqueue(const Command& command) { pending_.push_back(command); }

  StepReport advance();
  bool finished() const { return steps_done_ >= scenario_.duration; }
  /// Evaluates the predicate and logs the verdict record.
  Verdict finish();
  /// Runs to the end of the scenario and finishes.
  Verdict run();

  const SwarmEnv& env() const { return env_; }
  const Scenario& scenario() const { return scenario_; }
  const RunStats& stats() const { return stats_; }
  std::int64_t steps_done() const { return steps_done_; }
  std::uint64_t seed() const { return seed_; }
  const std::string& policy_label() const { return policy_label_; }

  nlohmann::json header() const;

 private:
  void apply(const Command& command, StepReport& report, std::optional<std::size_t> external);

  Scenario scenario_;
  std::uint64_t seed_;
  SwarmEnv env_;
  std::unique_ptr<Policy> policy_;
  std::string policy_label_;
  LogSink* log_;
  RunStats stats_;
  std::vector<Command> pending_;
  std::size_t script_pos_ = 0;
  std::int64_t steps_done_ = 0;
};

/// Builds a policy from a label: "oracle", "zero" or "model:<checkpoint path>".
std::unique_ptr<Policy> make_policy(const std::string& label);

}  // namespace swarmnav
