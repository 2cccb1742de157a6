from __future__ import annotations

import dataclasses
import json
import math
import typing as t
from pathlib import Path

from cpsu_distill.exceptions import ConfigError

# Track half-width and episode length of the physical rig.
TRACK_LIMIT_MM = 390.0
MAX_STEPS = 1000


@dataclasses.dataclass(frozen=True)
class SimConfig:
    """Physical and task parameters of the cart-pole swing-up simulator.

    Attributes:
        pole_length: rod length in m; the rod is uniform, pivoting at one end.
        cart_mass: cart mass in kg.
        pole_mass: rod mass in kg.
        gravity: gravitational acceleration in m/s^2.
        motor_force: force in N applied while Left or Right is held.
        cart_friction: viscous cart friction in N*s/m.
        pivot_friction: viscous hinge friction in N*m*s/rad.
        step_duration: seconds one action is held.
        integrator_substeps: RK4 substeps per step.
        track_limit_mm: the episode terminates once |y| exceeds this.
        max_steps: the episode is truncated at this step.
        ang_vel_safety_limit: the episode terminates once |u_dot_obs| exceeds this.
        sensor_noise_std: Gaussian noise std per observable, in observation units.
        action_delay_steps: length of the FIFO between policy and motor.
        ang_vel_obs_scale: deg/s per observation unit of angular velocity.
        y_dot_obs_scale: mm/s per observation unit of cart velocity.
        start_perturbation_std: Gaussian std of the start state, in observation units.
    """

    pole_length: float = 0.975
    cart_mass: float = 1.0
    pole_mass: float = 0.3
    gravity: float = 9.81
    motor_force: float = 6.0
    cart_friction: float = 0.5
    pivot_friction: float = 0.003
    step_duration: float = 0.1
    integrator_substeps: int = 20
    track_limit_mm: float = TRACK_LIMIT_MM
    max_steps: int = MAX_STEPS
    ang_vel_safety_limit: float = 100.0
    sensor_noise_std: t.Tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    action_delay_steps: int = 0
    ang_vel_obs_scale: float = 40.0
    y_dot_obs_scale: float = 390.0
    start_perturbation_std: float = 0.0

    def __post_init__(self) -> None:
        # JSON gives lists
        object.__setattr__(
            self, "sensor_noise_std", tuple(float(s) for s in self.sensor_noise_std)
        )
        for name in (
            "pole_length",
            "cart_mass",
            "pole_mass",
            "step_duration",
            "ang_vel_obs_scale",
            "y_dot_obs_scale",
            "track_limit_mm",
        ):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be finite and > 0, got {value}")
        for name in (
            "gravity",
            "motor_force",
            "cart_friction",
            "pivot_friction",
            "start_perturbation_std",
            "ang_vel_safety_limit",
        ):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ConfigError(f"{name} must be finite and >= 0, got {value}")
        if self.integrator_substeps < 1:
            raise ConfigError("integrator_substeps must be >= 1")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be >= 1")
        if self.action_delay_steps < 0:
            raise ConfigError("action_delay_steps must be >= 0")
        if len(self.sensor_noise_std) != 4 or any(
            not math.isfinite(s) or s < 0 for s in self.sensor_noise_std
        ):
            raise ConfigError("sensor_noise_std must hold 4 finite values >= 0")

    @property
    def substep(self) -> float:
        """Fixed RK4 step size in seconds."""
        return self.step_duration / self.integrator_substeps

    @classmethod
    def from_dict(cls, document: dict) -> "SimConfig":
        """Builds a config from a dict holding a subset of the field names.

        Raises:
            ConfigError: on unknown keys or invalid values.
        """
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(document) - known)
        if unknown:
            raise ConfigError(f"unknown SimConfig field(s): {', '.join(unknown)}")
        try:
            return cls(**document)
        except TypeError as e:
            raise ConfigError(f"invalid SimConfig: {e}")

    @classmethod
    def from_json(cls, filepath: str | Path) -> "SimConfig":
        filepath = Path(filepath)
        if not filepath.exists():
            raise FileNotFoundError(filepath)
        with open(filepath, "r", encoding="utf-8") as f:
            try:
                document = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError(f"{filepath}: not valid JSON ({e})")
        return cls.from_dict(document)

    def to_dict(self) -> dict:
        document = dataclasses.asdict(self)
        document["sensor_noise_std"] = list(self.sensor_noise_std)
        return document
