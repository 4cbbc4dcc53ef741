#include "swarmnav/session.hpp"

#include <algorithm>
#include <numeric>

#include "swarmnav/checkpoint.hpp"
#include "swarmnav/error.hpp"
#include "swarmnav/oracle.hpp"

namespace swarmnav {

using nlohmann::json;

// Statistics.

void RunStats::record(const SwarmEnv& env, const EnvStep& step, const std::optional<Aabb>& region) {
  const WorldState& w = env.world();
  const double comm = env.task_config().observation.comm_radius;
  const double safe = env.task_config().observation.safe_radius;
  double closest = kUnreachable;
  bool all_track = true;
  bool all_formed = true;
  int inside = 0;
  for (const auto& a : w.agents) {
    const Target* t = w.find_target(env.tracked_target(a.id));
    const double d = distance(a.position, t->position);
    closest = std::min(closest, d);
    all_track = all_track && d <= comm;
    bool has_neighbor = false;
    for (const auto& b : w.agents) {
      if (b.id == a.id) continue;
      const double nb = distance(a.position, b.position);
      if (nb >= safe && nb <= comm) {
        has_neighbor = true;
        break;
      }
    }
    all_formed = all_formed && has_neighbor;
    if (region && region->contains(a.position)) ++inside;
  }
  min_distance.push_back(closest);
  tracking.push_back(all_track ? 1 : 0);
  formation.push_back(all_formed ? 1 : 0);
  components.push_back(env.islands().component_count);
  std::vector<int> sizes;
  for (const auto& m : env.islands().members) sizes.push_back(static_cast<int>(m.size()));
  component_sizes.push_back(std::move(sizes));
  region_occupancy.push_back(inside);
  const auto& sig = step.rewards.signal;
  mean_signal.push_back(sig.empty() ? 0.0 : std::accumulate(sig.begin(), sig.end(), 0.0) / static_cast<double>(sig.size()));
  for (const auto& e : step.events) {
    if (e.kind == EventKind::destroyed) ++destroyed;
  }
}

double RunStats::tracking_fraction(std::int64_t first) const {
  const std::int64_t n = steps() - first;
  if (n <= 0) return 0.0;
  return static_cast<double>(std::accumulate(tracking.begin() + first, tracking.end(), 0)) / static_cast<double>(n);
}

double RunStats::formation_fraction(std::int64_t first) const {
  const std::int64_t n = steps() - first;
  if (n <= 0) return 0.0;
  return static_cast<double>(std::accumulate(formation.begin() + first, formation.end(), 0)) / static_cast<double>(n);
}

namespace {

std::vector<int> collapse(const std::vector<int>& v) {
  std::vector<int> out;
  for (int x : v) {
    if (out.empty() || out.back() != x) out.push_back(x);
  }
  return out;
}

}  // namespace

Verdict evaluate_predicate(const Predicate& p, const RunStats& s) {
  Verdict v;
  v.expect = p.expect.empty() ? success_label(p.kind) : p.expect;
  const std::int64_t n = s.steps();
  const auto reached_at = std::find(s.tracking.begin(), s.tracking.end(), 1);
  const bool reached = reached_at != s.tracking.end();
  const std::int64_t window_start = std::max<std::int64_t>(0, n - p.window);
  v.details["steps"] = n;
  v.details["destroyed"] = s.destroyed;
  v.details["reached_step"] = reached ? json(reached_at - s.tracking.begin() + 1) : json(nullptr);

  if (p.kind == "reach") {
    bool stalled = false;
    if (n > p.window) {
      const double before = *std::min_element(s.min_distance.begin(), s.min_distance.begin() + window_start);
      const double during = *std::min_element(s.min_distance.begin() + window_start, s.min_distance.end());
      stalled = during >= before - p.stall_tolerance;
      v.details["closest_before_window"] = before;
      v.details["closest_in_window"] = during;
    }
    v.label = reached ? "reached" : (stalled ? "stalled" : "moving");
  } else if (p.kind == "formation") {
    const double f = s.formation_fraction(window_start);
    v.details["formation_fraction"] = f;
    const bool tracking_end = n > 0 && s.tracking.back();
    v.label = f >= p.fraction && tracking_end ? "formed" : "not_formed";
  } else if (p.kind == "avoid") {
    v.label = s.destroyed > 0 ? "collided" : (reached ? "avoided" : "not_reached");
  } else if (p.kind == "single_file") {
    const int peak = s.region_occupancy.empty() ? 0 : *std::max_element(s.region_occupancy.begin(), s.region_occupancy.end());
    v.details["max_in_region"] = peak;
    v.details["passages"] = std::count_if(s.region_occupancy.begin(), s.region_occupancy.end(), [](int x) { return x > 0; });
    v.label = peak > 1 ? "crowded" : (reached ? "single_file" : "not_reached");
  } else if (p.kind == "one_swarm") {
    const bool one = n > 0 && s.components.back() == 1;
    const bool track = n > 0 && s.tracking.back();
    v.details["final_components"] = n > 0 ? s.components.back() : 0;
    v.label = !one ? "fragmented" : (track ? "one_swarm" : "not_tracking");
  } else if (p.kind == "island_cycle") {
    const auto seq = collapse(s.components);
    v.details["component_sequence"] = seq;
    // First 1 -> 2 transition, then the first later 2 -> 1.
    std::int64_t split = -1, merge = -1;
    for (std::int64_t t = 1; t < n && split < 0; ++t) {
      if (s.components[t - 1] == 1 && s.components[t] == 2) split = t;
    }
    for (std::int64_t t = split + 1; split >= 0 && t < n && merge < 0; ++t) {
      if (s.components[t - 1] == 2 && s.components[t] == 1) merge = t;
    }
    // The settled split: the longest run of two components between them.
    bool balanced = false;
    if (split >= 0 && merge >= 0) {
      std::int64_t best_len = 0, best_end = -1, run = 0;
      for (std::int64_t t = split; t < merge; ++t) {
        run = s.components[t] == 2 ? run + 1 : 0;
        if (run > best_len) {
          best_len = run;
          best_end = t;
        }
      }
      if (best_end >= 0) {
        const auto& sizes = s.component_sizes[static_cast<std::size_t>(best_end)];
        v.details["split_sizes"] = sizes;
        v.details["split_steps"] = best_len;
        balanced = sizes.size() == 2 && std::abs(sizes[0] - sizes[1]) <= 1;
      }
    }
    v.details["split_step"] = split >= 0 ? json(split + 1) : json(nullptr);
    v.details["merge_step"] = merge >= 0 ? json(merge + 1) : json(nullptr);
    v.label = split < 0 ? "no_split" : (merge < 0 ? "no_merge" : (balanced ? "split_merge" : "unbalanced"));
  } else if (p.kind == "tracking") {
    const double f = s.tracking_fraction(window_start);
    v.details["tracking_fraction"] = f;
    v.label = f >= p.fraction ? "tracking" : "lost";
  } else if (p.kind == "stable_flight") {
    v.label = s.destroyed > 0 ? "crashed" : (reached ? "stable_flight" : "not_reached");
  } else {
    throw ConfigError("unknown predicate kind '" + p.kind + "'");
  }
  v.pass = v.label == v.expect;
  return v;
}

// Log sinks.

FileLog::FileLog(const std::string& path) : out_(path, std::ios::trunc), path_(path) {
  if (!out_) throw Error("cannot open log file " + path);
}

void FileLog::line(const std::string& text) {
  out_ << text << '\n';
  if (!out_) throw Error("failed writing log file " + path_);
}

// Snapshots.

json snapshot_json(const SwarmEnv& env, const std::vector<Event>& events, const std::vector<IslandEvent>& island_events,
                   bool full_rewards) {
  const WorldState& w = env.world();
  json agents = json::array();
  for (const auto& a : w.agents) {
    auto it = env.graph().component_of.find(a.id);
    agents.push_back({{"id", a.id},
                      {"pos", a.position},
                      {"component", it == env.graph().component_of.end() ? -1 : it->second},
                      {"target", env.tracked_target(a.id)}});
  }
  json edges = json::array();
  for (const auto& [a, b] : env.graph().edges) edges.push_back({a, b});
  json obstacles = json::array();
  for (const auto& o : w.obstacles) {
    obstacles.push_back({{"id", o.id}, {"center", o.box.center}, {"half_extents", o.box.half_extents}});
  }
  json targets = json::array();
  for (const auto& t : w.targets) targets.push_back({{"id", t.id}, {"pos", t.position}});
  json ev = json::array();
  for (const auto& e : events) ev.push_back({{"kind", to_string(e.kind)}, {"id", e.id}, {"detail", e.detail}});
  for (const auto& e : island_events) {
    ev.push_back({{"kind", to_string(e.kind)}, {"from", e.from_count}, {"to", e.to_count}});
  }
  const RewardBreakdown& r = env.last_rewards();
  json rewards = {{"r_ms", r.r_ms}, {"rs_per_swarm", r.rs_per_swarm}};
  if (!r.signal.empty()) {
    rewards["mean_signal"] = std::accumulate(r.signal.begin(), r.signal.end(), 0.0) / static_cast<double>(r.signal.size());
  }
  if (full_rewards) {
    rewards["r_n"] = r.r_n;
    rewards["r_o"] = r.r_o;
    rewards["r_s"] = r.r_s;
    rewards["punishment"] = r.punishment;
    rewards["signal"] = r.signal;
  }
  return json{{"step", w.step},
              {"episode", env.episode()},
              {"agents", std::move(agents)},
              {"edges", std::move(edges)},
              {"components", env.islands().component_count},
              {"obstacles", std::move(obstacles)},
              {"targets", std::move(targets)},
              {"rewards", std::move(rewards)},
              {"events", std::move(ev)}};
}

// Session.

namespace {

EnvConfig seeded(EnvConfig env, std::uint64_t seed) {
  env.seed = seed;
  return env;
}

}  // namespace

Session::Session(Scenario scenario, std::uint64_t seed, std::unique_ptr<Policy> policy, std::string policy_label,
                 LogSink* log)
    : scenario_(std::move(scenario)),
      seed_(seed),
      env_(seeded(scenario_.env, seed), scenario_.task),
      policy_(std::move(policy)),
      policy_label_(std::move(policy_label)),
      log_(log) {
  if (!policy_) throw ContractError("session needs a policy");
  policy_->reset(env_);
  if (log_) log_->line(header().dump());
}

json Session::header() const {
  return json{{"type", "header"},
              {"version", kLogVersion},
              {"scenario", scenario_.name},
              {"seed", seed_},
              {"policy", policy_label_},
              {"env", seeded(scenario_.env, seed_)},
              {"task", scenario_.task},
              {"duration", scenario_.duration},
              {"predicate", scenario_.predicate}};
}

void Session::apply(const Command& c, StepReport& report, std::optional<std::size_t> external) {
  if (c.kind == CommandKind::pause || c.kind == CommandKind::resume || c.kind == CommandKind::set_speed) return;
  std::vector<Event> events;
  try {
    events = env_.apply(c);
  } catch (const Error& e) {
    if (!external) throw;
    report.rejected.push_back({*external, e.what()});
    return;
  }
  if (c.kind == CommandKind::reset) policy_->reset(env_);
  report.applied.push_back(c);
  if (log_) {
    json ev = json::array();
    for (const auto& e : events) ev.push_back({{"kind", to_string(e.kind)}, {"id", e.id}});
    log_->line(json{{"type", "command"}, {"step", steps_done_}, {"command", c}, {"events", ev}}.dump());
  }
}

StepReport Session::advance() {
  if (finished()) throw ContractError("session already reached its duration");
  StepReport report;
  while (script_pos_ < scenario_.script.size() && scenario_.script[script_pos_].step <= steps_done_) {
    apply(scenario_.script[script_pos_++].command, report, std::nullopt);
  }
  std::vector<Command> pending;
  pending.swap(pending_);
  for (std::size_t i = 0; i < pending.size(); ++i) apply(pending[i], report, i);

  const std::int64_t episode_before = env_.episode();
  const std::vector<Vec3> actions = policy_->act(env_);
  report.step = env_.step(actions);
  if (env_.episode() != episode_before) policy_->reset(env_);
  ++steps_done_;
  stats_.record(env_, report.step, scenario_.predicate.region);
  if (log_) {
    json rec = snapshot_json(env_, report.step.events, report.step.island_events, true);
    rec["type"] = "step";
    rec["index"] = steps_done_;
    log_->line(rec.dump());
  }
  return report;
}

Verdict Session::finish() {
  Verdict v = evaluate_predicate(scenario_.predicate, stats_);
  if (log_) {
    log_->line(json{{"type", "verdict"},
                    {"label", v.label},
                    {"expect", v.expect},
                    {"pass", v.pass},
                    {"details", v.details}}
                   .dump());
  }
  return v;
}

Verdict Session::run() {
  while (!finished()) advance();
  return finish();
}

std::unique_ptr<Policy> make_policy(const std::string& label) {
  if (label == "oracle") return std::make_unique<OraclePolicy>();
  if (label == "zero") return std::make_unique<ZeroPolicy>();
  if (label.rfind("model:", 0) == 0) {
    return std::make_unique<NetworkPolicy>(policy_model_from_checkpoint(load_checkpoint(label.substr(6))));
  }
  throw ConfigError("unknown policy '" + label + "' (expected oracle, zero or model:<file>)");
}

}  // namespace swarmnav
