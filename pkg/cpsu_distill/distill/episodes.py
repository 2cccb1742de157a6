from __future__ import annotations

import dataclasses
import logging
import typing as t
from pathlib import Path

import numpy as np

from cpsu_distill.policies.base import Policy
from cpsu_distill.sim.environment import CartPoleSwingUp
from cpsu_distill.sim.reward import reward_without_bonus
from cpsu_distill.sim.state import Action, Observation, SimState
from cpsu_distill.sim.trajectory import write_trajectory_csv

logger = logging.getLogger(__name__)


@dataclasses.dataclass
class EpisodeLog:
    """Full record of one episode.

    Entry ``i`` of every list belongs to step ``i + 1``: the observation the policy saw,
    the action it chose, and the reward, zenith flag and ground-truth state after the step.

    Attributes:
        seed: episode seed.
        observations: observation before each action.
        actions: chosen actions.
        rewards: per-step rewards.
        rewards_without_bonus: per-step rewards without the zenith bonus.
        in_zenith: zenith flag of each post-step state.
        states: post-step ground-truth states.
        terminated: the episode ended on a track or angular velocity limit.
        truncated: the episode hit max_steps.
    """

    seed: int
    observations: t.List[Observation] = dataclasses.field(default_factory=list)
    actions: t.List[Action] = dataclasses.field(default_factory=list)
    rewards: t.List[float] = dataclasses.field(default_factory=list)
    rewards_without_bonus: t.List[float] = dataclasses.field(default_factory=list)
    in_zenith: t.List[bool] = dataclasses.field(default_factory=list)
    states: t.List[SimState] = dataclasses.field(default_factory=list)
    terminated: bool = False
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.actions)

    @property
    def total_return(self) -> float:
        return float(sum(self.rewards))

    @property
    def return_without_bonus(self) -> float:
        return float(sum(self.rewards_without_bonus))

    @property
    def zenith_step_count(self) -> int:
        return sum(1 for z in self.in_zenith if z)

    @property
    def first_zenith_step(self) -> t.Optional[int]:
        """1-based step at which the zenith was first reached, ``None`` if never."""
        for i, z in enumerate(self.in_zenith):
            if z:
                return i + 1
        return None

    def __repr__(self) -> str:
        return (
            f"EpisodeLog(seed={self.seed}, steps={len(self)}, "
            f"return={self.total_return:.2f}, zenith_steps={self.zenith_step_count})"
        )


def episode_seeds(seed: int, n: int) -> t.List[int]:
    """``n`` episode seeds derived from one seed; a prefix of a longer list."""
    if n <= 0:
        return []
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n, dtype=np.uint32)]


def run_episode(policy: Policy, env: CartPoleSwingUp, seed: int) -> EpisodeLog:
    """Runs one episode until termination or truncation."""
    log = EpisodeLog(seed=seed)
    observation = env.reset(seed)
    while True:
        action = Action(policy.act(observation))
        result = env.step(action)
        log.observations.append(observation)
        log.actions.append(action)
        log.rewards.append(result.reward)
        log.rewards_without_bonus.append(reward_without_bonus(env.state, env.config))
        log.in_zenith.append(result.in_zenith)
        log.states.append(env.state)
        observation = result.observation
        if result.done:
            log.terminated = result.terminated
            log.truncated = result.truncated
            return log


def run_episodes(
    policy: Policy, env: CartPoleSwingUp, n: int, seed: int
) -> t.List[EpisodeLog]:
    """``n`` seeded episodes; the same (policy, n, seed) always gives the same logs."""
    if n < 1:
        raise ValueError(f"need at least one episode, got {n}")
    logs = []
    for k, episode_seed in enumerate(episode_seeds(seed, n)):
        log = run_episode(policy, env, episode_seed)
        logger.debug("episode %d: %r", k, log)
        logs.append(log)
    return logs


def collect_base(
    oracle: Policy, env: CartPoleSwingUp, episodes: int, seed: int
) -> t.List[EpisodeLog]:
    """Runs the oracle for ``episodes`` seeded episodes to gather base samples."""
    logs = run_episodes(oracle, env, episodes, seed)
    logger.info(
        "collected %d base episodes, %d reached the zenith",
        len(logs),
        sum(1 for log in logs if log.zenith_step_count > 0),
    )
    return logs


def save_trajectory(log: EpisodeLog, filepath: str | Path) -> Path:
    return write_trajectory_csv(
        filepath,
        states=log.states,
        actions=log.actions,
        rewards=log.rewards,
        in_zenith=log.in_zenith,
        terminated=log.terminated,
        truncated=log.truncated,
    )
