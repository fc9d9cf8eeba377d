# Copyright 2026 The difffp Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


import math

import pytest

import difffp


def test_env_registry_and_step():
    assert set(difffp.env_names()) >= {"scalar-duel", "particle-tag"}
    env = difffp.Env("scalar-duel")
    assert env.num_agents == 2 and env.zero_sum
    env.reset(0)
    step = env.step([[0.5], [0.5]])
    assert step["rewards"] == [0.25, -0.25]
    assert step["terminated"]
    assert difffp.scalar_duel_step(1.0, -1.0) == (-1.0, 1.0)


def test_unknown_env_is_value_error():
    with pytest.raises(difffp.ConfigError):
        difffp.Env("pong")
    assert issubclass(difffp.ConfigError, ValueError)
    assert issubclass(difffp.MissingCheckpointError, FileNotFoundError)


def test_mixture_weights_are_uniform():
    for k in (1, 7, 50):
        weights = difffp.mixture_weights(k)
        assert len(weights) == k
        assert all(w == 1.0 / k for w in weights)


def test_schedule_and_forward_noise():
    s = difffp.NoiseSchedule.variance_preserving(8, 0.1, 10.0)
    assert s.steps == 8
    a = difffp.forward_noise(s, [0.4], 3, [0.0])
    assert a[0] == pytest.approx(math.sqrt(s.alpha_bar(3)) * 0.4, abs=1e-7)


def test_weight_by_return_and_td_target():
    w = difffp.weight_by_return([0.0, 1.0], 1.0, 100.0)
    assert w[1] / w[0] == pytest.approx(math.e, rel=1e-5)
    assert difffp.td_target(1.0, 0.9, 2.0, 3.0, False) == pytest.approx(2.8)


def test_constant_profile_exploitability():
    r = difffp.constant_profile_exploitability("scalar-duel", 1.0, 1.0)
    assert r["total"] == pytest.approx(2.0, abs=0.05)
    r = difffp.constant_profile_exploitability("scalar-duel", 0.0, 0.0)
    assert r["total"] == 0.0


def test_config_round_trip():
    c = difffp.ExperimentConfig.parse("env.name = scalar-duel\nseed = 4\n")
    assert c.env_name == "scalar-duel" and c.seed == 4
    again = difffp.ExperimentConfig.parse(c.serialize())
    assert again.hash() == c.hash()
    assert "br.env_steps" in difffp.config_keys()
    with pytest.raises(difffp.ConfigError, match="fp.iteratoins"):
        difffp.ExperimentConfig.parse("env.name = scalar-duel\nfp.iteratoins = 2\n")


def test_train_exploit_and_load(tmp_path):
    c = difffp.ExperimentConfig.parse(
        "env.name = scalar-duel\nfp.iterations = 3\nfp.oracle_br = true\n"
        "eval.episodes = 20\nrun.name = py\n"
    )
    run = difffp.train(c, tmp_path)
    assert (run / "metrics.csv").exists()
    report = difffp.exploit(run, report_path=tmp_path / "r.json")
    assert math.isfinite(report["total"])
    ckpt = difffp.load_checkpoint(run / "agent0" / "iter2.ckpt")
    assert ckpt["fp_iteration"] == 2 and ckpt["side"] == 0
    with pytest.raises(difffp.MissingCheckpointError):
        difffp.exploit(run, iteration=9, report_path=tmp_path / "x.json")
    with pytest.raises(difffp.NotTraceableError):
        difffp.trace(run, tmp_path / "t.csv")
    assert difffp.exit_code_for_error("trace") == 5
