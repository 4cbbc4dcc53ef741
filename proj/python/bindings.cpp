#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "swarmnav/bridge.hpp"
#include "swarmnav/error.hpp"
#include "swarmnav/harness.hpp"

namespace py = pybind11;
using namespace swarmnav;
using nlohmann::json;

// JSON crosses the boundary as text; the Python package decodes it.
namespace {

Scenario scenario_from(const std::string& text) {
  Scenario s = json::parse(text).get<Scenario>();
  s.validate();
  return s;
}

json verdict_json(const Verdict& v) {
  return {{"label", v.label}, {"expect", v.expect}, {"pass", v.pass}, {"details", v.details}};
}

json metric_json(const MetricRecord& r) {
  return {{"update", r.update}, {"steps", r.steps}, {"mcr", r.mcr},          {"vl", r.vl},
          {"pl", r.pl},         {"entropy", r.entropy}, {"wall_s", r.wall_s}};
}

class PyEnv {
 public:
  explicit PyEnv(const std::string& scenario)
      : env_([&] {
          const Scenario s = scenario_from(scenario);
          return SwarmEnv(s.env, s.task);
        }()) {}

  void reset(std::optional<std::uint64_t> seed) { env_.reset(seed); }
  Eigen::MatrixXd observe() const { return env_.observe(); }

  std::string step(const Eigen::MatrixXd& actions) {
    if (actions.cols() != 3) throw ContractError("actions must have shape (agents, 3)");
    std::vector<Vec3> a;
    for (Eigen::Index i = 0; i < actions.rows(); ++i) a.push_back({actions(i, 0), actions(i, 1), actions(i, 2)});
    const EnvStep s = env_.step(a);
    json out = snapshot_json(env_, s.events, s.island_events, true);
    out["episode_end"] = s.episode_end;
    return out.dump();
  }

  std::string state() const { return snapshot_json(env_, {}, {}, true).dump(); }

  std::string apply(const std::string& command) {
    json ev = json::array();
    for (const auto& e : env_.apply(json::parse(command).get<Command>())) {
      ev.push_back({{"kind", to_string(e.kind)}, {"id", e.id}});
    }
    return ev.dump();
  }

  int agent_count() const { return env_.agent_count(); }
  int observation_width() const { return env_.observation_width(); }

 private:
  SwarmEnv env_;
};

}  // namespace

PYBIND11_MODULE(_swarmnav, m) {
  m.doc() = "Swarm navigation core";

  // Later registrations are tried first, so the base class goes first.
  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<CommandError>(m, "CommandError", base.ptr());
  py::register_exception<PlacementError>(m, "PlacementError", base.ptr());
  py::register_exception<ContractError>(m, "ContractError", base.ptr());

  m.attr("default_experiment_seed") = kDefaultExperimentSeed;
  m.def("experiment_ids", &experiment_ids);

  m.def("build_experiment", [](const std::string& id) {
    json out = json::array();
    for (const auto& s : build_experiment(id)) out.push_back(s);
    return out.dump();
  });

  m.def("smoke_scenario", [] { return json(smoke_scenario()).dump(); });

  m.def(
      "run_experiment",
      [](const std::string& id, const std::string& policy, std::uint64_t seed) {
        std::vector<ExperimentRun> runs;
        {
          py::gil_scoped_release release;
          runs = run_experiment(id, policy, seed);
        }
        json out = json::array();
        for (const auto& r : runs) {
          out.push_back({{"scenario", r.scenario.name}, {"verdict", verdict_json(r.verdict)}, {"log", r.log}});
        }
        return out.dump();
      },
      py::arg("id"), py::arg("policy") = "oracle", py::arg("seed") = kDefaultExperimentSeed);

  m.def(
      "evaluate",
      [](const std::string& policy, const std::string& scenario, int episodes, std::uint64_t seed) {
        const Scenario s = scenario_from(scenario);
        py::gil_scoped_release release;
        return to_json(evaluate(policy, s, episodes, seed)).dump();
      },
      py::arg("policy"), py::arg("scenario"), py::arg("episodes") = 5, py::arg("seed") = 0);

  m.def("replay_log", [](const std::vector<std::string>& lines) {
    const ReplayResult r = replay_log(lines);
    return json{{"runs", r.runs}, {"identical", r.identical}, {"mismatch", r.mismatch}}.dump();
  });

  m.def(
      "train",
      [](const std::string& scenario, const std::string& options) {
        const Scenario s = scenario_from(scenario);
        const json o = json::parse(options);
        TrainOptions t;
        t.algo = o.value("algo", t.algo);
        t.preset = o.value("preset", t.preset);
        t.steps = o.value("steps", t.steps);
        t.seed = o.value("seed", t.seed);
        t.out_dir = o.value("out_dir", t.out_dir);
        t.instances = o.value("instances", t.instances);
        t.checkpoint_every = o.value("checkpoint_every", t.checkpoint_every);
        t.overrides = o.value("overrides", json::object());
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(s, t);
        }
        json rows = json::array();
        for (const auto& row : r.metrics) rows.push_back(metric_json(row));
        return json{{"metrics", rows}, {"checkpoint", r.checkpoint}}.dump();
      },
      py::arg("scenario"), py::arg("options") = "{}");

  m.def("parse_client_message", [](const std::string& text) {
    const ParsedMessage p = parse_client_message(text);
    return p.command ? json{{"command", *p.command}}.dump() : json{{"error", p.error}}.dump();
  });

  py::class_<PyEnv>(m, "Env")
      .def(py::init<const std::string&>(), py::arg("scenario"))
      .def("reset", &PyEnv::reset, py::arg("seed") = std::nullopt)
      .def("observe", &PyEnv::observe)
      .def("step", &PyEnv::step, py::arg("actions"))
      .def("state", &PyEnv::state)
      .def("apply", &PyEnv::apply, py::arg("command"))
      .def_property_readonly("agent_count", &PyEnv::agent_count)
      .def_property_readonly("observation_width", &PyEnv::observation_width);
}
