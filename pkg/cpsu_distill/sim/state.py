from __future__ import annotations

import dataclasses
import enum
import math

import numpy as np

from cpsu_distill.sim.config import SimConfig


class Action(enum.IntEnum):
    """Discrete motor commands. Values are the class labels used by trees and MLPs."""

    Left = 0
    NoOp = 1
    Right = 2

    @property
    def direction(self) -> int:
        """Sign of the motor force, -1, 0 or +1."""
        return self.value - 1


N_ACTIONS = len(Action)


def wrap_degrees(angle: float) -> float:
    """Wraps an angle in degrees to [-180, 180]."""
    if -180.0 <= angle <= 180.0:
        return angle
    return (angle + 180.0) % 360.0 - 180.0


@dataclasses.dataclass(frozen=True)
class SimState:
    """Ground-truth state of cart and pole.

    Attributes:
        u: pole angle in degrees, 0 hanging down, +-180 upright.
        u_dot: angular velocity in deg/s.
        y: cart position in mm, 0 at track centre.
        y_dot: cart velocity in mm/s.
    """

    u: float = 0.0
    u_dot: float = 0.0
    y: float = 0.0
    y_dot: float = 0.0

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in (self.u, self.u_dot, self.y, self.y_dot))

    def to_si(self) -> np.ndarray:
        """Integrator vector ``[x (m), theta (rad), x_dot (m/s), theta_dot (rad/s)]``."""
        return np.array(
            [
                self.y / 1000.0,
                math.radians(self.u),
                self.y_dot / 1000.0,
                math.radians(self.u_dot),
            ]
        )

    @classmethod
    def from_si(cls, vector: np.ndarray, wrap: bool = True) -> "SimState":
        x, theta, x_dot, theta_dot = (float(v) for v in vector)
        u = math.degrees(theta)
        return cls(
            u=wrap_degrees(u) if wrap else u,
            u_dot=math.degrees(theta_dot),
            y=x * 1000.0,
            y_dot=x_dot * 1000.0,
        )


@dataclasses.dataclass(frozen=True)
class Observation:
    """The normalised 4-vector handed to policies."""

    u_norm: float = 0.0
    u_dot_obs: float = 0.0
    y_norm: float = 0.0
    y_dot_obs: float = 0.0

    @classmethod
    def from_state(cls, state: SimState, config: SimConfig) -> "Observation":
        return cls(
            u_norm=state.u / 180.0,
            u_dot_obs=state.u_dot / config.ang_vel_obs_scale,
            y_norm=state.y / config.track_limit_mm,
            y_dot_obs=state.y_dot / config.y_dot_obs_scale,
        )

    @classmethod
    def from_array(cls, values) -> "Observation":
        u_norm, u_dot_obs, y_norm, y_dot_obs = (float(v) for v in values)
        return cls(u_norm, u_dot_obs, y_norm, y_dot_obs)

    def as_array(self) -> np.ndarray:
        return np.array([self.u_norm, self.u_dot_obs, self.y_norm, self.y_dot_obs])

    def is_finite(self) -> bool:
        return all(
            math.isfinite(v)
            for v in (self.u_norm, self.u_dot_obs, self.y_norm, self.y_dot_obs)
        )


@dataclasses.dataclass(frozen=True)
class StepResult:
    observation: Observation
    reward: float
    terminated: bool
    truncated: bool
    in_zenith: bool

    @property
    def done(self) -> bool:
        return self.terminated or self.truncated
