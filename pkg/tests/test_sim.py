import dataclasses
import math

import numpy as np
import pytest

from cpsu_distill.exceptions import ConfigError, EpisodeFinishedError, NumericError
from cpsu_distill.sim import (
    Action,
    CartPoleSwingUp,
    Observation,
    SimConfig,
    SimState,
    is_zenith,
    reward_fn,
    reward_without_bonus,
    wrap_degrees,
)


def test_reward_upright_centred_at_rest():
    assert reward_fn(SimState(u=180.0, u_dot=0.0, y=0.0)) == pytest.approx(11.0, abs=1e-9)


def test_reward_hanging():
    assert reward_fn(SimState(u=0.0)) == pytest.approx(0.0, abs=1e-9)


def test_reward_horizontal():
    state = SimState(u=90.0, u_dot=0.0, y=0.0)
    assert not is_zenith(state)
    assert reward_fn(state) == pytest.approx(0.5, abs=1e-9)


def test_reward_at_track_limit_has_no_position_credit():
    assert reward_without_bonus(SimState(u=180.0, y=390.0)) == pytest.approx(0.0, abs=1e-12)
    # beyond the limit the position term is clipped, not negative
    assert reward_without_bonus(SimState(u=180.0, y=-400.0)) == 0.0


@pytest.mark.parametrize(
    "u, u_dot, expected",
    [
        (176.0, 0.0, True),
        (-176.0, 5.9, True),
        (175.0, 0.0, False),
        (179.0, 6.0, False),
        (179.0, -7.0, False),
    ],
)
def test_zenith_boundary(u, u_dot, expected):
    assert is_zenith(SimState(u=u, u_dot=u_dot)) is expected


def test_observation_normalisation(sim_config):
    observation = Observation.from_state(
        SimState(u=-90.0, u_dot=80.0, y=195.0, y_dot=-39.0), sim_config
    )
    assert observation.u_norm == pytest.approx(-0.5)
    assert observation.u_dot_obs == pytest.approx(2.0)
    assert observation.y_norm == pytest.approx(0.5)
    assert observation.y_dot_obs == pytest.approx(-0.1)


def test_wrap_degrees():
    assert wrap_degrees(190.0) == pytest.approx(-170.0)
    assert wrap_degrees(-190.0) == pytest.approx(170.0)
    assert wrap_degrees(180.0) == 180.0
    assert wrap_degrees(-180.0) == -180.0


def test_action_direction():
    assert [a.direction for a in Action] == [-1, 0, 1]


def test_reset_starts_hanging_at_rest(sim_config):
    env = CartPoleSwingUp(sim_config)
    assert env.reset(seed=1) == Observation()
    assert env.state == SimState()


def test_noop_stays_at_rest_and_truncates(sim_config):
    env = CartPoleSwingUp(sim_config)
    env.reset(seed=0)
    total = 0.0
    for step in range(1, sim_config.max_steps + 1):
        result = env.step(Action.NoOp)
        total += result.reward
        assert not result.terminated
        assert result.truncated is (step == sim_config.max_steps)
    assert total == 0.0
    with pytest.raises(EpisodeFinishedError):
        env.step(Action.NoOp)


def test_right_push_moves_cart_right(sim_config):
    env = CartPoleSwingUp(sim_config)
    env.reset(seed=0)
    result = env.step(Action.Right)
    assert env.state.y > 0
    assert env.state.y_dot > 0
    assert result.observation.y_norm > 0


def test_track_limit_terminates(sim_config):
    env = CartPoleSwingUp(sim_config)
    env.reset(seed=0)
    env.set_state(SimState(y=389.0, y_dot=500.0))
    result = env.step(Action.Right)
    assert result.terminated
    assert not result.truncated


def test_termination_takes_precedence_over_truncation():
    config = SimConfig(max_steps=1)
    env = CartPoleSwingUp(config)
    env.reset(seed=0)
    env.set_state(SimState(y=389.0, y_dot=500.0))
    result = env.step(Action.Right)
    assert result.terminated
    assert not result.truncated


def test_angular_velocity_limit_terminates(sim_config):
    env = CartPoleSwingUp(sim_config)
    env.reset(seed=0)
    env.set_state(SimState(u=0.0, u_dot=8000.0))
    assert env.step(Action.NoOp).terminated


def test_set_state_rejects_non_finite(sim_config):
    env = CartPoleSwingUp(sim_config)
    env.reset(seed=0)
    with pytest.raises(NumericError):
        env.set_state(SimState(u=math.nan))


def test_action_delay_executes_queued_actions():
    config = SimConfig(action_delay_steps=2)
    env = CartPoleSwingUp(config)
    env.reset(seed=0)
    # the first two executed actions are the NoOps that pre-fill the queue
    env.step(Action.Right)
    env.step(Action.Right)
    assert env.state == SimState()
    env.step(Action.NoOp)
    assert env.state.y > 0


def test_sensor_noise_is_seeded_and_keeps_angle_in_range():
    config = SimConfig(sensor_noise_std=(0.5, 0.1, 0.01, 0.01))
    first = CartPoleSwingUp(config)
    second = CartPoleSwingUp(config)
    a = [first.reset(seed=5)] + [first.step(Action.NoOp).observation for _ in range(20)]
    b = [second.reset(seed=5)] + [second.step(Action.NoOp).observation for _ in range(20)]
    assert a == b
    assert all(-1.0 <= o.u_norm <= 1.0 for o in a)
    assert a[0] != Observation()


def test_start_perturbation_depends_on_seed():
    config = SimConfig(start_perturbation_std=0.01)
    env = CartPoleSwingUp(config)
    assert env.reset(seed=1) == env.reset(seed=1)
    assert env.reset(seed=1) != env.reset(seed=2)


@pytest.mark.parametrize(
    "overrides",
    [
        {"pole_length": 0.0},
        {"motor_force": -1.0},
        {"integrator_substeps": 0},
        {"sensor_noise_std": (0.0, 0.0, 0.0)},
        {"step_duration": math.inf},
    ],
)
def test_invalid_config_raises(overrides):
    with pytest.raises(ConfigError):
        SimConfig(**overrides)


def test_config_from_dict_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="bogus"):
        SimConfig.from_dict({"bogus": 1})


def test_config_from_dict_round_trip():
    config = SimConfig(motor_force=3.0, sensor_noise_std=(0.1, 0.0, 0.0, 0.0))
    assert SimConfig.from_dict(config.to_dict()) == config


def _random_states(n, seed):
    rng = np.random.default_rng(seed)
    states = []
    for k in range(n):
        if k % 2:
            # near the zenith box, on both sides of both limits
            u = rng.choice([-1.0, 1.0]) * rng.uniform(170.0, 180.0)
            u_dot = rng.uniform(-10.0, 10.0)
        else:
            u = rng.uniform(-180.0, 180.0)
            u_dot = rng.uniform(-4000.0, 4000.0)
        y = rng.uniform(-450.0, 450.0)
        states.append(SimState(u=u, u_dot=u_dot, y=y, y_dot=rng.uniform(-2000.0, 2000.0)))
    return states


def test_reward_bounds_and_bonus_agree_with_zenith():
    states = _random_states(2000, seed=8)
    assert any(is_zenith(s) for s in states)
    for state in states:
        reward = reward_fn(state)
        assert 0.0 <= reward <= 11.0
        assert (reward >= 10.0) == is_zenith(state)
        assert 0.0 <= reward_without_bonus(state) <= 1.0


def test_sensor_noise_leaves_rewards_untouched(sim_config):
    clean = dataclasses.replace(sim_config, max_steps=40, start_perturbation_std=0.01)
    noisy = dataclasses.replace(clean, sensor_noise_std=(0.05, 0.05, 0.05, 0.05))
    # bounded back-and-forth so the cart stays on the track
    pattern = [Action.Right] * 2 + [Action.NoOp] + [Action.Left] * 4 + [Action.NoOp] + [Action.Right] * 2
    actions = pattern * 4
    runs = []
    for config in (clean, noisy):
        env = CartPoleSwingUp(config)
        env.reset(seed=12)
        results = [env.step(a) for a in actions]
        assert not any(r.terminated for r in results)
        runs.append(([r.reward for r in results], env.state, results[-1].observation))
    assert runs[0][0] == runs[1][0]
    assert runs[0][1] == runs[1][1]
    assert runs[0][2] != runs[1][2]
