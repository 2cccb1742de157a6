"""Long-running properties of the oracle and of a desk-scale distillation run.

Deselect with ``pytest -m "not slow"``.
"""

from pathlib import Path

import numpy as np
import pytest

from cpsu_distill.config import RunConfig
from cpsu_distill.distill import run_distillation, save_run
from cpsu_distill.distill.episodes import run_episode
from cpsu_distill.distill.iterative import derive_seed
from cpsu_distill.evalstats import evaluate_policy
from cpsu_distill.policies import EnergyOracle
from cpsu_distill.sim import CartPoleSwingUp, SimConfig

pytestmark = pytest.mark.slow

DESK_CONFIG = Path(__file__).resolve().parent.parent / "configs" / "desk_scale.json"
FRESH_STREAM = 99


@pytest.fixture(scope="module")
def desk_config():
    return RunConfig.from_json(DESK_CONFIG)


@pytest.fixture(scope="module")
def desk_run(desk_config):
    oracle = EnergyOracle(sim_config=desk_config.sim)
    return run_distillation(desk_config.distill, oracle, desk_config.sim)


def test_oracle_swings_up_in_every_episode():
    config = SimConfig(start_perturbation_std=0.01)
    logs = evaluate_policy(EnergyOracle(sim_config=config), config, n=20, seed=2024)
    first_steps = [log.first_zenith_step for log in logs]
    assert all(step is not None for step in first_steps)
    assert np.median(first_steps) < 400
    assert np.mean([log.total_return for log in logs]) > 2000
    assert not any(log.terminated for log in logs)


def test_oracle_holds_the_zenith_from_rest():
    config = SimConfig()
    log = run_episode(EnergyOracle(sim_config=config), CartPoleSwingUp(config), seed=0)
    assert log.truncated and not log.terminated
    assert log.first_zenith_step < 200
    assert log.zenith_step_count > 500
    assert log.total_return > 6000


def test_desk_scale_distillation_improves(desk_config, desk_run):
    seed = derive_seed(desk_config.master_seed, FRESH_STREAM)
    oracle = EnergyOracle(sim_config=desk_config.sim)

    def mean_return(policy):
        logs = evaluate_policy(policy, desk_config.sim, n=20, seed=seed)
        return float(np.mean([log.total_return for log in logs]))

    iteration0 = desk_run.trees[0][desk_run.records[0].best_tree_id]
    final = mean_return(desk_run.best_tree)
    assert final >= 0.9 * mean_return(oracle)
    assert final > mean_return(iteration0)


def test_desk_scale_runs_are_byte_identical(desk_config, desk_run, tmp_path):
    oracle = EnergyOracle(sim_config=desk_config.sim)
    again = run_distillation(desk_config.distill, oracle, desk_config.sim)
    first = save_run(desk_run, desk_config.distill, desk_config.sim, tmp_path / "a")
    second = save_run(again, desk_config.distill, desk_config.sim, tmp_path / "b")
    assert first.read_bytes() == second.read_bytes()
