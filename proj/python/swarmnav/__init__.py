"""Python access to the swarm navigation simulator, trainers and harness."""

import json

import numpy as np

from . import _swarmnav as _core
from ._swarmnav import CommandError, ConfigError, ContractError, Error, PlacementError

__all__ = [
    "CommandError",
    "ConfigError",
    "ContractError",
    "Env",
    "Error",
    "PlacementError",
    "build_experiment",
    "default_experiment_seed",
    "evaluate",
    "experiment_ids",
    "parse_client_message",
    "replay_log",
    "run_experiment",
    "smoke_scenario",
    "train",
]

default_experiment_seed = _core.default_experiment_seed


def experiment_ids():
    return list(_core.experiment_ids())


def build_experiment(experiment_id):
    return json.loads(_core.build_experiment(experiment_id))


def smoke_scenario():
    return json.loads(_core.smoke_scenario())


def run_experiment(experiment_id, policy="oracle", seed=default_experiment_seed):
    return json.loads(_core.run_experiment(experiment_id, policy, seed))


def evaluate(policy, scenario, episodes=5, seed=0):
    return json.loads(_core.evaluate(policy, json.dumps(scenario), episodes, seed))


def replay_log(lines):
    return json.loads(_core.replay_log(list(lines)))


def train(scenario, **options):
    return json.loads(_core.train(json.dumps(scenario), json.dumps(options)))


def parse_client_message(text):
    return json.loads(_core.parse_client_message(text))


class Env:
    """One environment instance. Observations have one row per agent."""

    def __init__(self, scenario):
        self._env = _core.Env(json.dumps(scenario))

    @property
    def agent_count(self):
        return self._env.agent_count

    @property
    def observation_width(self):
        return self._env.observation_width

    def reset(self, seed=None):
        self._env.reset(seed)
        return self.observe()

    def observe(self):
        return np.asarray(self._env.observe()).T.copy()

    def step(self, actions):
        a = np.asarray(actions, dtype=np.float64).reshape(-1, 3)
        return json.loads(self._env.step(a))

    def state(self):
        return json.loads(self._env.state())

    def apply(self, command):
        return json.loads(self._env.apply(json.dumps(command)))
