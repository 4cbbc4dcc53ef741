#include "swarmnav/harness.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "swarmnav/checkpoint.hpp"
#include "swarmnav/error.hpp"
#include "swarmnav/log.hpp"
#include "swarmnav/ppo.hpp"
#include "swarmnav/rng.hpp"
#include "swarmnav/sac.hpp"

namespace swarmnav {

using nlohmann::json;

namespace {

Scenario base_scenario(std::string name, std::string description, double axis, int agents, std::int64_t duration) {
  Scenario s;
  s.name = std::move(name);
  s.description = std::move(description);
  s.env.axis_length = axis;
  s.env.agent_count = agents;
  s.env.random_tick = false;
  s.env.episode_length = static_cast<int>(duration);
  s.env.seed = kDefaultExperimentSeed;
  s.task.auto_reset = false;
  s.duration = duration;
  return s;
}

// Box from its lower and upper corners.
ObstacleSpec box(Vec3 lo, Vec3 hi) { return {(lo + hi) * 0.5, (hi - lo) * 0.5}; }

Aabb region(Vec3 lo, Vec3 hi) { return {(lo + hi) * 0.5, (hi - lo) * 0.5}; }

void set_obstacles(EnvConfig& env, std::vector<ObstacleSpec> boxes) {
  env.obstacle_placement = Placement::static_listed;
  env.obstacle_count = static_cast<int>(boxes.size());
  double lo = kUnreachable, hi = 0.0;
  for (const auto& b : boxes) {
    for (int a = 0; a < 3; ++a) {
      lo = std::min(lo, 2.0 * b.half_extents[a]);
      hi = std::max(hi, 2.0 * b.half_extents[a]);
    }
  }
  env.obstacle_size_min = boxes.empty() ? 1.0 : lo;
  env.obstacle_size_max = boxes.empty() ? 1.0 : hi;
  env.obstacles = std::move(boxes);
}

void set_targets(EnvConfig& env, std::vector<Vec3> targets) {
  env.target_count = static_cast<int>(targets.size());
  env.target_positions = std::move(targets);
}

Command move(int id, Vec3 p) {
  Command c;
  c.kind = CommandKind::move_target;
  c.target_id = id;
  c.position = p;
  return c;
}

// Moves two targets linearly from (a0, b0) to (a1, b1), one command pair
// every `every` steps over [first, last].
void glide(std::vector<ScheduledCommand>& script, std::int64_t first, std::int64_t last, std::int64_t every, Vec3 a0,
           Vec3 a1, Vec3 b0, Vec3 b1) {
  const std::int64_t moves = (last - first) / every;
  for (std::int64_t k = 1; k <= moves; ++k) {
    const double f = static_cast<double>(k) / static_cast<double>(moves);
    const std::int64_t step = first + k * every;
    script.push_back({step, move(0, a0 + (a1 - a0) * f)});
    script.push_back({step, move(1, b0 + (b1 - b0) * f)});
  }
}

Scenario experiment_1a() {
  Scenario s = base_scenario("exp1a_formation", "Open arena, one central target; the swarm forms around it.", 30.0, 23,
                             600);
  set_targets(s.env, {{15, 15, 15}});
  s.predicate.kind = "formation";
  return s;
}

Scenario experiment_1b() {
  Scenario s = base_scenario("exp1b_obstacle_avoidance",
                             "Staggered blocks between the spawn slab and the target; nothing may collide.", 40.0, 16,
                             600);
  std::vector<ObstacleSpec> boxes;
  const double h = 2.5;
  for (auto [y, z] : std::vector<std::pair<double, double>>{{13, 13}, {13, 27}, {27, 13}, {27, 27}, {20, 20}}) {
    boxes.push_back(box({16 - h, y - h, z - h}, {16 + h, y + h, z + h}));
  }
  for (auto [y, z] : std::vector<std::pair<double, double>>{{20, 12}, {20, 28}, {12, 20}, {28, 20}}) {
    boxes.push_back(box({25 - h, y - h, z - h}, {25 + h, y + h, z + h}));
  }
  set_obstacles(s.env, std::move(boxes));
  set_targets(s.env, {{35, 20, 20}});
  s.env.agent_spawn_region = region({2, 8, 8}, {10, 32, 32});
  s.predicate.kind = "avoid";
  return s;
}

Scenario experiment_2() {
  Scenario s = base_scenario("exp2_boxed_target",
                             "Target inside a box closed on five sides; the only way in is over the open top. "
                             "Box: 10x10 footprint, unit-thick walls, cavity floor at z=10, rim at z=20.",
                             30.0, 12, 600);
  set_obstacles(s.env, {box({10, 10, 9}, {20, 20, 10}),    // floor
                        box({10, 10, 10}, {11, 20, 20}),   // -x wall
                        box({19, 10, 10}, {20, 20, 20}),   // +x wall
                        box({11, 10, 10}, {19, 11, 20}),   // -y wall
                        box({11, 19, 10}, {19, 20, 20})});  // +y wall
  set_targets(s.env, {{15, 15, 14}});
  s.env.agent_spawn_region = region({2, 2, 2}, {8, 8, 8});
  s.predicate.kind = "reach";
  return s;
}

Scenario experiment_3(DistanceMetric metric) {
  const bool geo = metric == DistanceMetric::geodesic;
  Scenario s = base_scenario(geo ? "exp3_wall_geodesic" : "exp3_wall_euclidean",
                             "Target hidden behind a wall whose only opening is a gap along one edge.", 30.0, 12, 600);
  set_obstacles(s.env, {box({14, 5, 0}, {15, 30, 30})});
  set_targets(s.env, {{26, 18, 15}});
  s.env.agent_spawn_region = region({2, 12, 10}, {8, 24, 20});
  s.task.metric = metric;
  s.predicate.kind = "reach";
  s.predicate.expect = geo ? "reached" : "stalled";
  s.predicate.window = 200;
  return s;
}

Scenario experiment_4() {
  Scenario s = base_scenario("exp4_single_file", "Wall with a single 1x1 hole; agents pass one at a time.", 30.0, 12,
                             800);
  const double lo = 14, hi = 15;
  set_obstacles(s.env, {box({14, 0, 0}, {16, lo, 30}), box({14, hi, 0}, {16, 30, 30}), box({14, lo, 0}, {16, hi, lo}),
                        box({14, lo, hi}, {16, hi, 30})});
  set_targets(s.env, {{24, 14.5, 14.5}});
  s.env.agent_spawn_region = region({2, 8, 8}, {10, 21, 21});
  s.predicate.kind = "single_file";
  s.predicate.region = region({14, lo, lo}, {16, hi, hi});
  return s;
}

Scenario experiment_5a() {
  Scenario s = base_scenario("exp5a_close_targets", "Two static targets close together in a 1000-unit^3 arena.", 10.0,
                             12, 400);
  set_targets(s.env, {{3.5, 5, 5}, {6.5, 5, 5}});
  s.task.rewards.r_ms_weight = 1.0;
  s.predicate.kind = "one_swarm";
  return s;
}

Scenario experiment_5b() {
  Scenario s = base_scenario("exp5b_split_merge",
                             "Two targets drift apart until the swarm splits, hold, then come back until it merges.",
                             40.0, 16, 800);
  const Vec3 a_near{18, 20, 20}, b_near{22, 20, 20}, a_far{4, 20, 20}, b_far{36, 20, 20};
  set_targets(s.env, {a_near, b_near});
  s.env.agent_spawn_region = region({14, 14, 14}, {26, 26, 26});
  s.task.rewards.r_ms_weight = 1.0;
  glide(s.script, 100, 250, 5, a_near, a_far, b_near, b_far);
  glide(s.script, 450, 600, 5, a_far, a_near, b_far, b_near);
  s.predicate.kind = "island_cycle";
  return s;
}

Scenario experiment_6a() {
  Scenario s = base_scenario("exp6a_dynamic_target", "One target wandering at up to 0.2 units per step.", 30.0, 12, 800);
  set_targets(s.env, {{15, 15, 15}});
  s.env.target_motion = {true, 0.2};
  s.predicate.kind = "tracking";
  s.predicate.window = 400;
  s.predicate.fraction = 0.8;
  return s;
}

Scenario experiment_6b() {
  Scenario s = base_scenario("exp6b_physics", "Gravity and linear drag on, random static blocks.", 30.0, 12, 600);
  s.env.physics_mode = PhysicsMode::physical;
  s.env.obstacle_count = 10;
  s.env.obstacle_size_min = 1.0;
  s.env.obstacle_size_max = 3.0;
  s.predicate.kind = "stable_flight";
  return s;
}

Scenario experiment_6c() {
  Scenario s = base_scenario("exp6c_complex",
                             "Heavier drag with moving blocks and two wandering targets (the large multi-target "
                             "layout scaled down to a 30-unit arena).",
                             30.0, 12, 600);
  const EnvConfig c = presets::complex_environment();
  s.env.physics_mode = c.physics_mode;
  s.env.linear_drag = c.linear_drag;
  s.env.angular_drag = c.angular_drag;
  s.env.obstacle_motion = c.obstacle_motion;
  s.env.target_motion = c.target_motion;
  s.env.obstacle_count = 20;
  s.env.obstacle_size_min = 1.0;
  s.env.obstacle_size_max = 3.0;
  s.env.target_count = 2;
  s.predicate.kind = "reach";
  return s;
}

}  // namespace

Scenario smoke_scenario() {
  Scenario s = base_scenario("smoke", "Empty 20-unit arena, four agents, one static target.", 20.0, 4, 900);
  s.env.seed = 0;
  s.predicate.kind = "tracking";
  s.predicate.window = 900;
  s.predicate.fraction = 0.6;
  s.predicate.expect = success_label(s.predicate.kind);
  return s;
}

const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids{"1a", "1b", "2", "3", "4", "5a", "5b", "6a", "6b", "6c"};
  return ids;
}

std::vector<Scenario> build_experiment(const std::string& id) {
  std::vector<Scenario> out;
  if (id == "1a") out = {experiment_1a()};
  else if (id == "1b") out = {experiment_1b()};
  else if (id == "2") out = {experiment_2()};
  else if (id == "3") out = {experiment_3(DistanceMetric::euclidean), experiment_3(DistanceMetric::geodesic)};
  else if (id == "4") out = {experiment_4()};
  else if (id == "5a") out = {experiment_5a()};
  else if (id == "5b") out = {experiment_5b()};
  else if (id == "6a") out = {experiment_6a()};
  else if (id == "6b") out = {experiment_6b()};
  else if (id == "6c") out = {experiment_6c()};
  else throw ConfigError("unknown experiment id '" + id + "'");
  for (auto& s : out) {
    if (s.predicate.expect.empty()) s.predicate.expect = success_label(s.predicate.kind);
    s.validate();
  }
  return out;
}

std::vector<ExperimentRun> run_experiment(const std::string& id, const std::string& policy_label, std::uint64_t seed) {
  std::vector<ExperimentRun> runs;
  for (auto& scenario : build_experiment(id)) {
    MemoryLog log;
    Session session(scenario, seed, make_policy(policy_label), policy_label, &log);
    Verdict v = session.run();
    runs.push_back({std::move(scenario), std::move(v), std::move(log.lines)});
  }
  return runs;
}

// Evaluation.

json to_json(const EvalSummary& s) {
  json eps = json::array();
  for (const auto& e : s.episodes) {
    eps.push_back({{"seed", e.seed},
                   {"cumulative_reward", e.cumulative_reward},
                   {"formation_fraction", e.formation_fraction},
                   {"tracking_fraction", e.tracking_fraction},
                   {"destroyed", e.destroyed},
                   {"verdict", e.verdict.label}});
  }
  return json{{"episodes", eps},
              {"mean_reward", s.mean_reward},
              {"mean_formation", s.mean_formation},
              {"mean_tracking", s.mean_tracking},
              {"destroyed", s.destroyed}};
}

EvalSummary evaluate(const std::string& policy_label, const Scenario& scenario, int episodes, std::uint64_t seed,
                     LogSink* record) {
  if (episodes < 1) throw ConfigError("evaluation needs at least one episode");
  if (policy_label.rfind("model:", 0) == 0) {
    const json ck = load_checkpoint(policy_label.substr(6));
    const TaskConfig trained = ck.at("task").get<TaskConfig>();
    const auto& a = trained.observation;
    const auto& b = scenario.task.observation;
    if (a.bins_per_axis != b.bins_per_axis || a.sensor_count != b.sensor_count || a.comm_radius != b.comm_radius ||
        a.safe_radius != b.safe_radius || a.sensor_range != b.sensor_range || trained.metric != scenario.task.metric) {
      throw ConfigError("checkpoint observation settings do not match the scenario");
    }
  }
  EvalSummary summary;
  for (int e = 0; e < episodes; ++e) {
    const std::uint64_t s = mix_seed(seed, static_cast<std::uint64_t>(e));
    Session session(scenario, s, make_policy(policy_label), policy_label, record);
    const Verdict v = session.run();
    const RunStats& st = session.stats();
    EpisodeSummary ep;
    ep.seed = s;
    ep.cumulative_reward = std::accumulate(st.mean_signal.begin(), st.mean_signal.end(), 0.0);
    ep.formation_fraction = st.formation_fraction();
    ep.tracking_fraction = st.tracking_fraction();
    ep.destroyed = st.destroyed;
    ep.verdict = v;
    summary.mean_reward += ep.cumulative_reward / episodes;
    summary.mean_formation += ep.formation_fraction / episodes;
    summary.mean_tracking += ep.tracking_fraction / episodes;
    summary.destroyed += ep.destroyed;
    summary.episodes.push_back(std::move(ep));
  }
  return summary;
}

// Replay.

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) {
    if (!l.empty()) lines.push_back(l);
  }
  return lines;
}

namespace {

bool is_step(const std::string& line) { return line.find("\"type\":\"step\"") != std::string::npos; }

ReplayResult replay_run(const std::vector<std::string>& lines, std::size_t begin, std::size_t end, ReplayResult r) {
  const json header = json::parse(lines[begin]);
  if (header.value("version", 0) != kLogVersion) throw ConfigError("unsupported trajectory log version");
  Scenario s;
  s.name = header.at("scenario").get<std::string>();
  s.env = header.at("env").get<EnvConfig>();
  s.task = header.at("task").get<TaskConfig>();
  s.duration = header.at("duration").get<std::int64_t>();
  s.predicate = header.at("predicate").get<Predicate>();
  for (std::size_t i = begin + 1; i < end; ++i) {
    const json rec = json::parse(lines[i]);
    if (rec.at("type") == "command") {
      s.script.push_back({rec.at("step").get<std::int64_t>(), rec.at("command").get<Command>()});
    }
  }
  const std::string label = header.at("policy").get<std::string>();
  MemoryLog log;
  Session session(s, header.at("seed").get<std::uint64_t>(), make_policy(label), label, &log);
  const std::int64_t recorded_steps = std::count_if(lines.begin() + static_cast<std::ptrdiff_t>(begin),
                                                    lines.begin() + static_cast<std::ptrdiff_t>(end),
                                                    is_step);
  while (session.steps_done() < recorded_steps && !session.finished()) session.advance();
  const bool has_verdict = lines[end - 1].find("\"type\":\"verdict\"") != std::string::npos;
  if (has_verdict) session.finish();
  const std::size_t n = end - begin;
  for (std::size_t i = 0; i < std::max(n, log.lines.size()); ++i) {
    const std::string* want = i < n ? &lines[begin + i] : nullptr;
    const std::string* got = i < log.lines.size() ? &log.lines[i] : nullptr;
    if (!want || !got || *want != *got) {
      r.identical = false;
      r.mismatch = "run " + std::to_string(r.runs) + ", line " + std::to_string(i + 1) + ": " +
                   (want ? want->substr(0, 200) : std::string("<missing>")) + " vs " +
                   (got ? got->substr(0, 200) : std::string("<missing>"));
      break;
    }
  }
  return r;
}

}  // namespace

ReplayResult replay_log(const std::vector<std::string>& lines) {
  ReplayResult result;
  std::vector<std::size_t> headers;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].rfind("{\"", 0) == 0 && lines[i].find("\"type\":\"header\"") != std::string::npos) headers.push_back(i);
  }
  if (headers.empty() || headers.front() != 0) throw ConfigError("trajectory log does not start with a header");
  headers.push_back(lines.size());
  for (std::size_t h = 0; h + 1 < headers.size(); ++h) {
    result = replay_run(lines, headers[h], headers[h + 1], result);
    ++result.runs;
    if (!result.identical) break;
  }
  return result;
}

// Training.

TrainResult train(const Scenario& scenario, const TrainOptions& options,
                  const std::function<void(const MetricRecord&)>& on_update) {
  if (options.preset != "default" && options.preset != "customized") {
    throw ConfigError("preset must be default or customized");
  }
  TaskConfig task = scenario.task;
  task.auto_reset = true;
  std::unique_ptr<MetricsSink> sink;
  if (!options.out_dir.empty()) {
    std::filesystem::create_directories(options.out_dir);
    sink = std::make_unique<MetricsSink>((std::filesystem::path(options.out_dir) / "metrics.csv").string());
  }
  TrainResult result;
  const auto checkpoint_path = [&] { return (std::filesystem::path(options.out_dir) / "checkpoint.json").string(); };
  std::function<json()> snapshot;
  auto record = [&](const MetricRecord& r) {
    result.metrics.push_back(r);
    if (sink) sink->write(r);
    if (options.checkpoint_every > 0 && !options.out_dir.empty() &&
        result.metrics.size() % static_cast<std::size_t>(options.checkpoint_every) == 0) {
      save_checkpoint(snapshot(), checkpoint_path());
    }
    if (on_update) on_update(r);
  };

  if (options.algo == "ppo") {
    json cj = PpoConfig{};
    cj["network"] = options.preset == "customized" ? "customized-ppo+memory" : "default";
    cj.merge_patch(options.overrides);
    if (options.steps > 0) cj["total_steps"] = options.steps;
    if (options.instances > 0) cj["instances"] = options.instances;
    cj["seed"] = options.seed;
    PpoConfig cfg = cj.get<PpoConfig>();
    PpoTrainer trainer(scenario.env, task, cfg);
    snapshot = [&] { return trainer.checkpoint(); };
    trainer.train(record);
    result.checkpoint = trainer.checkpoint();
  } else if (options.algo == "sac") {
    json cj = SacConfig{};
    cj["network"] = options.preset == "customized" ? "customized-sac" : "default";
    cj.merge_patch(options.overrides);
    if (options.steps > 0) cj["total_steps"] = options.steps;
    if (options.instances > 0) cj["instances"] = options.instances;
    cj["seed"] = options.seed;
    SacConfig cfg = cj.get<SacConfig>();
    SacTrainer trainer(scenario.env, task, cfg);
    snapshot = [&] { return trainer.checkpoint(); };
    const std::string replay_path =
        options.out_dir.empty() ? std::string() : (std::filesystem::path(options.out_dir) / "replay.bin").string();
    trainer.train(record, replay_path);
    result.checkpoint = trainer.checkpoint();
  } else {
    throw ConfigError("algo must be ppo or sac");
  }
  if (!options.out_dir.empty()) save_checkpoint(result.checkpoint, checkpoint_path());
  return result;
}

}  // namespace swarmnav
