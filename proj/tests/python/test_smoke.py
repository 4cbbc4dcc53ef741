import json
import os
import subprocess

import numpy as np
import pytest

import swarmnav


def test_experiment_ids():
    assert swarmnav.experiment_ids() == ["1a", "1b", "2", "3", "4", "5a", "5b", "6a", "6b", "6c"]
    assert len(swarmnav.build_experiment("3")) == 2
    with pytest.raises(swarmnav.ConfigError):
        swarmnav.build_experiment("nope")


def test_env_step_and_observe():
    env = swarmnav.Env(swarmnav.smoke_scenario())
    obs = env.reset(seed=3)
    assert obs.shape == (4, env.observation_width)
    assert env.observation_width == 4 + 3 * 32 + 18
    # Direction part is a unit vector, squashed distance lies in [0, 1).
    assert np.allclose(np.linalg.norm(obs[:, :3], axis=1), 1.0)
    assert np.all((obs[:, 3] >= 0) & (obs[:, 3] < 1))
    before = np.array([a["pos"] for a in env.state()["agents"]])
    out = env.step(np.zeros((4, 3)))
    after = np.array([a["pos"] for a in out["agents"]])
    assert np.allclose(before, after)
    assert len(out["rewards"]["signal"]) == 4
    with pytest.raises(swarmnav.ContractError):
        env.step(np.zeros((3, 3)))


def test_env_commands():
    env = swarmnav.Env(swarmnav.smoke_scenario())
    env.apply({"type": "move_target", "id": 0, "pos": [2, 3, 4]})
    assert env.state()["targets"][0]["pos"] == [2.0, 3.0, 4.0]
    with pytest.raises(swarmnav.CommandError):
        env.apply({"type": "move_target", "id": 7, "pos": [2, 3, 4]})


def test_env_is_deterministic():
    a = swarmnav.Env(swarmnav.smoke_scenario())
    b = swarmnav.Env(swarmnav.smoke_scenario())
    rng = np.random.default_rng(0)
    for _ in range(20):
        act = rng.uniform(-0.5, 0.5, size=(4, 3))
        assert a.step(act) == b.step(act)


def test_experiment_and_replay():
    runs = swarmnav.run_experiment("3")
    assert [r["verdict"]["label"] for r in runs] == ["stalled", "reached"]
    replay = swarmnav.replay_log(runs[1]["log"])
    assert replay["identical"] and replay["runs"] == 1


def test_evaluate():
    scenario = swarmnav.smoke_scenario()
    scenario["duration"] = 100
    a = swarmnav.evaluate("oracle", scenario, episodes=2, seed=1)
    b = swarmnav.evaluate("oracle", scenario, episodes=2, seed=1)
    assert a == b
    assert len(a["episodes"]) == 2


def test_short_training(tmp_path):
    result = swarmnav.train(
        swarmnav.smoke_scenario(),
        algo="ppo",
        steps=1024,
        instances=1,
        seed=5,
        out_dir=str(tmp_path),
        overrides={"time_horizon": 64, "batch_size": 128, "buffer_size": 512},
    )
    assert len(result["metrics"]) >= 1
    assert result["checkpoint"]["algo"] == "ppo"
    assert (tmp_path / "checkpoint.json").exists()


def test_parse_client_message():
    ok = swarmnav.parse_client_message('{"type":"pause","version":1}')
    assert ok["command"]["type"] == "pause"
    bad = swarmnav.parse_client_message('{"type":"pause","version":9}')
    assert "error" in bad


@pytest.mark.skipif(not os.environ.get("SWARMNAV_CLI"), reason="command-line tool path not given")
def test_cli_experiment_matches_module(tmp_path):
    log = tmp_path / "exp.jsonl"
    subprocess.run([os.environ["SWARMNAV_CLI"], "experiment", "5a", "--log", str(log)], check=True,
                   capture_output=True)
    lines = log.read_text().splitlines()
    assert lines == swarmnav.run_experiment("5a")[0]["log"]
    assert json.loads(lines[-1])["pass"]
