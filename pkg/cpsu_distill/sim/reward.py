from __future__ import annotations

import math

from cpsu_distill.sim.config import SimConfig
from cpsu_distill.sim.state import SimState

ZENITH_BONUS = 10.0
# |u'| > 175/180 and |u_dot'| < 6/40, both in observation units
ZENITH_ANGLE_NORM = 175.0 / 180.0
ZENITH_ANG_VEL_OBS = 6.0 / 40.0

_DEFAULT_CONFIG = SimConfig()


def is_zenith(state: SimState, config: SimConfig = _DEFAULT_CONFIG) -> bool:
    """True if the pole is close enough to upright and nearly still."""
    u_norm = state.u / 180.0
    u_dot_obs = state.u_dot / config.ang_vel_obs_scale
    return abs(u_norm) > ZENITH_ANGLE_NORM and abs(u_dot_obs) < ZENITH_ANG_VEL_OBS


def reward_without_bonus(state: SimState, config: SimConfig = _DEFAULT_CONFIG) -> float:
    """Angle term times position term, in [0, 1].

    The position term is clipped at zero, which only matters once |y| exceeds the
    track limit on the terminating step.
    """
    angle_term = 0.5 * (1.0 - math.cos(state.u * math.pi / 180.0))
    position_term = max(0.0, math.cos(0.5 * math.pi * state.y / config.track_limit_mm))
    return angle_term * position_term


def reward_fn(state: SimState, config: SimConfig = _DEFAULT_CONFIG) -> float:
    """Per-step reward, in [0, 11]."""
    bonus = ZENITH_BONUS if is_zenith(state, config) else 0.0
    return reward_without_bonus(state, config) + bonus
