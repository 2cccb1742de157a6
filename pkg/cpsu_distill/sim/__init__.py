"""Init module."""

from .config import SimConfig
from .dynamics import integrate, mechanical_energy, small_angle_period
from .environment import CartPoleSwingUp
from .reward import is_zenith, reward_fn, reward_without_bonus
from .state import N_ACTIONS, Action, Observation, SimState, StepResult, wrap_degrees
from .trajectory import write_trajectory_csv

__all__ = [
    "SimConfig",
    "SimState",
    "Observation",
    "Action",
    "N_ACTIONS",
    "StepResult",
    "CartPoleSwingUp",
    "integrate",
    "mechanical_energy",
    "small_angle_period",
    "is_zenith",
    "reward_fn",
    "reward_without_bonus",
    "wrap_degrees",
    "write_trajectory_csv",
]
