from __future__ import annotations

import collections
import logging
import typing as t

import numpy as np

from cpsu_distill.exceptions import EpisodeFinishedError, NumericError
from cpsu_distill.sim.config import SimConfig
from cpsu_distill.sim.dynamics import integrate
from cpsu_distill.sim.reward import is_zenith, reward_fn
from cpsu_distill.sim.state import Action, Observation, SimState, StepResult, wrap_degrees

logger = logging.getLogger(__name__)


class CartPoleSwingUp(object):
    """Seedable cart-pole swing-up episode.

    One instance runs one episode at a time and is not shared between threads;
    independent instances can run in parallel.

    Attributes:
        config: simulator parameters.
        state: current ground-truth state.
        step_count: steps taken in the current episode.
    """

    def __init__(self, config: SimConfig | None = None) -> None:
        self.config = config if config is not None else SimConfig()
        self.state = SimState()
        self.step_count = 0
        self._rng = np.random.default_rng(0)
        self._delay_queue: t.Deque[Action] = collections.deque()
        self._finished = True

    def reset(self, seed: int) -> Observation:
        """Starts a new episode from the hanging rest state.

        Args:
            seed: seeds the start perturbation and the sensor noise.

        Returns:
            The first observation.
        """
        self._rng = np.random.default_rng(seed)
        std = self.config.start_perturbation_std
        if std > 0:
            du, du_dot, dy, dy_dot = self._rng.normal(0.0, std, size=4)
            self.state = SimState(
                u=wrap_degrees(du * 180.0),
                u_dot=du_dot * self.config.ang_vel_obs_scale,
                y=dy * self.config.track_limit_mm,
                y_dot=dy_dot * self.config.y_dot_obs_scale,
            )
        else:
            self.state = SimState()
        self._delay_queue = collections.deque(
            [Action.NoOp] * self.config.action_delay_steps
        )
        self.step_count = 0
        self._finished = False
        return self.observe()

    def set_state(self, state: SimState) -> None:
        """Overrides the ground-truth state of the running episode."""
        if not state.is_finite():
            raise NumericError(f"non-finite state: {state}")
        self.state = state

    def observe(self) -> Observation:
        """Observation of the current state, with sensor noise if configured."""
        observation = Observation.from_state(self.state, self.config)
        noise_std = self.config.sensor_noise_std
        if any(s > 0 for s in noise_std):
            noise = self._rng.normal(0.0, 1.0, size=4) * np.asarray(noise_std)
            observation = Observation(
                # keep the angle observable inside [-1, 1]
                u_norm=wrap_degrees((observation.u_norm + noise[0]) * 180.0) / 180.0,
                u_dot_obs=observation.u_dot_obs + noise[1],
                y_norm=observation.y_norm + noise[2],
                y_dot_obs=observation.y_dot_obs + noise[3],
            )
        return observation

    def step(self, action: Action | int) -> StepResult:
        """Holds an action for one step duration.

        With ``action_delay_steps > 0`` the action enters a FIFO and the oldest queued
        action is executed instead.

        Raises:
            EpisodeFinishedError: if the episode already terminated or was truncated.
        """
        if self._finished:
            raise EpisodeFinishedError(
                "step() called on a finished episode, call reset() first"
            )
        action = Action(action)
        if self.config.action_delay_steps > 0:
            self._delay_queue.append(action)
            executed = self._delay_queue.popleft()
        else:
            executed = action

        force = executed.direction * self.config.motor_force
        self.state = integrate(
            self.state, force, self.config.step_duration, self.config
        )
        self.step_count += 1

        reward = reward_fn(self.state, self.config)
        in_zenith = is_zenith(self.state, self.config)
        terminated = abs(self.state.y) > self.config.track_limit_mm or (
            abs(self.state.u_dot / self.config.ang_vel_obs_scale)
            > self.config.ang_vel_safety_limit
        )
        truncated = not terminated and self.step_count >= self.config.max_steps
        if terminated:
            logger.debug(
                "episode terminated at step %d, state %s", self.step_count, self.state
            )
        self._finished = terminated or truncated
        return StepResult(
            observation=self.observe(),
            reward=reward,
            terminated=terminated,
            truncated=truncated,
            in_zenith=in_zenith,
        )
