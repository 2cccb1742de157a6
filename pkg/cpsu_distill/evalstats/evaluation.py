from __future__ import annotations

import logging
import typing as t

from cpsu_distill.distill.episodes import EpisodeLog, run_episodes
from cpsu_distill.evalstats.summary import EvalSummary, summarize_logs
from cpsu_distill.policies.base import Policy
from cpsu_distill.sim.config import SimConfig
from cpsu_distill.sim.environment import CartPoleSwingUp

logger = logging.getLogger(__name__)


def evaluate_policy(
    policy: Policy,
    env: CartPoleSwingUp | SimConfig | None,
    n: int,
    seed: int,
) -> t.List[EpisodeLog]:
    """Runs ``n`` seeded evaluation episodes.

    Args:
        policy: anything with ``act(observation)``.
        env: environment, or the config to build a fresh one from.
        n: number of episodes, at least 1.
        seed: derives the episode seeds; equal seeds give equal episodes for any policy.

    Returns:
        One log per episode.
    """
    if not isinstance(env, CartPoleSwingUp):
        env = CartPoleSwingUp(env)
    logs = run_episodes(policy, env, n, seed)
    logger.debug(
        "evaluated %r over %d episodes: mean return %.2f",
        policy,
        n,
        sum(log.total_return for log in logs) / n,
    )
    return logs


def evaluate_summary(
    policy: Policy, env: CartPoleSwingUp | SimConfig | None, n: int, seed: int
) -> t.Tuple[t.List[EpisodeLog], EvalSummary]:
    logs = evaluate_policy(policy, env, n, seed)
    return logs, summarize_logs(logs)
