#include <csignal>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "swarmnav/bridge_server.hpp"
#include "swarmnav/error.hpp"
#include "swarmnav/harness.hpp"
#include "swarmnav/log.hpp"

using namespace swarmnav;
using nlohmann::json;

namespace {

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) { g_stop = 1; }

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return json::parse(in);
}

int run_train(const std::string& scenario_path, TrainOptions options, const std::string& config_path, bool quiet) {
  const Scenario scenario = load_scenario(scenario_path);
  if (!config_path.empty()) options.overrides = load_json_file(config_path);
  train(scenario, options, [&](const MetricRecord& r) {
    if (!quiet) std::cout << format_metric_row(r) << std::endl;
  });
  if (!options.out_dir.empty()) std::cout << "wrote " << options.out_dir << "/metrics.csv and checkpoint.json\n";
  return 0;
}

int run_eval(const std::string& policy, const std::string& scenario_path, int episodes, std::uint64_t seed,
             const std::string& record) {
  const Scenario scenario = load_scenario(scenario_path);
  std::unique_ptr<FileLog> log;
  if (!record.empty()) log = std::make_unique<FileLog>(record);
  const EvalSummary s = evaluate(policy, scenario, episodes, seed, log.get());
  std::cout << to_json(s).dump(2) << "\n";
  return 0;
}

int run_experiment_cmd(const std::string& id, const std::string& policy, std::uint64_t seed, std::string log_path) {
  if (log_path.empty()) log_path = "experiment_" + id + ".jsonl";
  const auto runs = run_experiment(id, policy, seed);
  FileLog log(log_path);
  bool all = true;
  for (const auto& r : runs) {
    for (const auto& l : r.log) log.line(l);
    std::cout << r.scenario.name << ": " << r.verdict.label << " (expected " << r.verdict.expect << ") "
              << (r.verdict.pass ? "PASS" : "FAIL") << "\n";
    all = all && r.verdict.pass;
  }
  std::cout << "log: " << log_path << "\n";
  return all ? 0 : 2;
}

int run_replay(const std::string& path) {
  const ReplayResult r = replay_log(read_lines(path));
  if (r.identical) {
    std::cout << "identical: " << r.runs << " run(s) reproduced\n";
    return 0;
  }
  std::cout << "mismatch: " << r.mismatch << "\n";
  return 1;
}

int run_serve(const std::string& scenario_path, const std::string& policy, std::uint64_t seed, const ServerOptions& opts,
              const std::string& log_path) {
  const Scenario scenario = load_scenario(scenario_path);
  std::unique_ptr<FileLog> log;
  if (!log_path.empty()) log = std::make_unique<FileLog>(log_path);
  LiveSession live(scenario, seed, policy, log.get());
  BridgeServer server(live, opts);
  server.start();
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "serving " << scenario.name << " on ws://" << opts.address << ":" << server.port() << std::endl;
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  return 0;
}

int run_export(const std::string& out) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out) / "presets");
  fs::create_directories(fs::path(out) / "scenarios");
  for (int row = 1; row <= 3; ++row) {
    save_env_config(presets::single_target(row), (fs::path(out) / "presets" / ("single_target_" + std::to_string(row) + ".json")).string());
  }
  for (int row = 1; row <= 6; ++row) {
    save_env_config(presets::multi_target(row), (fs::path(out) / "presets" / ("multi_target_" + std::to_string(row) + ".json")).string());
  }
  save_env_config(presets::complex_environment(), (fs::path(out) / "presets" / "complex_environment.json").string());
  for (const auto& id : experiment_ids()) {
    for (const auto& s : build_experiment(id)) save_scenario(s, (fs::path(out) / "scenarios" / (s.name + ".json")).string());
  }
  save_scenario(smoke_scenario(), (fs::path(out) / "scenarios" / "smoke.json").string());
  std::cout << "wrote presets and scenarios under " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Swarm navigation simulator, trainers and experiment harness"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log info messages");

  TrainOptions topt;
  std::string t_scenario, t_config;
  bool t_quiet = false;
  auto* train_cmd = app.add_subcommand("train", "Train a policy with PPO or SAC");
  train_cmd->add_option("--scenario", t_scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--algo", topt.algo, "ppo or sac")->check(CLI::IsMember({"ppo", "sac"}));
  train_cmd->add_option("--preset", topt.preset, "Network preset")->check(CLI::IsMember({"default", "customized"}));
  train_cmd->add_option("--steps", topt.steps, "Transitions to collect (0 = algorithm default)");
  train_cmd->add_option("--seed", topt.seed, "Seed");
  train_cmd->add_option("--out", topt.out_dir, "Output directory")->required();
  train_cmd->add_option("--instances", topt.instances, "Parallel environment instances (0 = default)");
  train_cmd->add_option("--checkpoint-every", topt.checkpoint_every, "Metric rows between checkpoint saves");
  train_cmd->add_option("--config", t_config, "JSON file with hyperparameter overrides")->check(CLI::ExistingFile);
  train_cmd->add_flag("-q,--quiet", t_quiet, "Do not echo metric rows");

  std::string e_model, e_scenario, e_record, e_policy;
  int e_episodes = 5;
  std::uint64_t e_seed = 0;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint (or a built-in policy) on a scenario");
  auto* model_opt = eval_cmd->add_option("--model", e_model, "Checkpoint file")->check(CLI::ExistingFile);
  eval_cmd->add_option("--policy", e_policy, "oracle or zero instead of a checkpoint")->excludes(model_opt);
  eval_cmd->add_option("--scenario", e_scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--episodes", e_episodes, "Episodes")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--record", e_record, "Trajectory log to write");
  eval_cmd->add_option("--seed", e_seed, "Seed");

  std::string x_id, x_policy = "oracle", x_log;
  std::uint64_t x_seed = kDefaultExperimentSeed;
  auto* exp_cmd = app.add_subcommand("experiment", "Run a scripted experiment and print its verdict");
  exp_cmd->add_option("id", x_id, "Experiment id")->required()->check(CLI::IsMember(experiment_ids()));
  exp_cmd->add_option("--policy", x_policy, "oracle, zero or model:<checkpoint>");
  exp_cmd->add_option("--seed", x_seed, "Seed");
  exp_cmd->add_option("--log", x_log, "Trajectory log (default experiment_<id>.jsonl)");

  std::string r_log;
  auto* replay_cmd = app.add_subcommand("replay", "Re-simulate a trajectory log and compare");
  replay_cmd->add_option("--log", r_log, "Trajectory log")->required()->check(CLI::ExistingFile);

  std::string s_scenario, s_policy = "oracle", s_log;
  std::uint64_t s_seed = 0;
  ServerOptions sopt;
  auto* serve_cmd = app.add_subcommand("serve", "Stream a live session over WebSocket");
  serve_cmd->add_option("--scenario", s_scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--policy", s_policy, "oracle, zero or model:<checkpoint>");
  serve_cmd->add_option("--port", sopt.port, "TCP port");
  serve_cmd->add_option("--address", sopt.address, "Bind address");
  serve_cmd->add_option("--seed", s_seed, "Seed");
  serve_cmd->add_option("--rate", sopt.steps_per_second, "Steps per second at speed 1")->check(CLI::PositiveNumber);
  serve_cmd->add_option("--log", s_log, "Trajectory log to write");

  std::string d_out;
  auto* data_cmd = app.add_subcommand("export", "Write preset environments and experiment scenarios as JSON");
  data_cmd->add_option("--out", d_out, "Directory (presets/ and scenarios/ are created inside)")->required();

  CLI11_PARSE(app, argc, argv);
  if (verbose) set_log_level(LogLevel::info);

  try {
    if (*train_cmd) return run_train(t_scenario, topt, t_config, t_quiet);
    if (*eval_cmd) {
      if (e_model.empty() && e_policy.empty()) throw ConfigError("eval needs --model or --policy");
      return run_eval(e_model.empty() ? e_policy : "model:" + e_model, e_scenario, e_episodes, e_seed, e_record);
    }
    if (*exp_cmd) return run_experiment_cmd(x_id, x_policy, x_seed, x_log);
    if (*replay_cmd) return run_replay(r_log);
    if (*serve_cmd) return run_serve(s_scenario, s_policy, s_seed, sopt, s_log);
    if (*data_cmd) return run_export(d_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
