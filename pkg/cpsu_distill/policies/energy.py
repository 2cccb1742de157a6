"""Analytic swing-up oracle: momentum-limited energy pumping, quantised balance near upright."""

from __future__ import annotations

import dataclasses
import logging
import math

import numpy as np

from cpsu_distill.exceptions import ConfigError, NumericError
from cpsu_distill.sim.config import SimConfig
from cpsu_distill.sim.state import Action, Observation

logger = logging.getLogger(__name__)

# Balance gains on (phi / 180 deg, u_dot_obs, y_norm, y_dot_obs), tuned once on the
# default simulator and frozen.
DEFAULT_BALANCE_GAINS = (-52.0, -2.8, 1.2, 0.9)

_MODEL_FIELDS = (
    "pole_length",
    "gravity",
    "cart_mass",
    "pole_mass",
    "motor_force",
    "step_duration",
    "track_limit_mm",
    "ang_vel_obs_scale",
    "y_dot_obs_scale",
)


@dataclasses.dataclass(frozen=True)
class EnergyOracleParams:
    """Parameters of the energy-shaping oracle.

    The balance gains act on observation units and produce a command in units of the
    motor force: the oracle emits Right above ``deadband``, Left below ``-deadband``
    and NoOp in between.

    Attributes:
        energy_gain: gain on the normalised energy error (target 2, in units of m*g*l).
        balance_angle_deg: the balance law takes over within this angle of upright.
        balance_gain_angle: gain on the angle from upright, normalised by 180 deg.
        balance_gain_angvel: gain on u_dot_obs.
        balance_gain_pos: gain on y_norm.
        balance_gain_vel: gain on y_dot_obs.
        deadband: command magnitude below which NoOp is emitted.
        edge_margin: fraction of the track half-width the cart may not brake past.
        drift_position_gain: 1/s, weight of the centre-of-mass position in the drift
            that gates pumping.
        pole_length: rod length in m.
        gravity: m/s^2.
        cart_mass: kg.
        pole_mass: kg.
        motor_force: N, sets the braking deceleration of the edge guard.
        step_duration: s per action.
        track_limit_mm: track half-width.
        ang_vel_obs_scale: deg/s per u_dot_obs unit.
        y_dot_obs_scale: mm/s per y_dot_obs unit.
    """

    energy_gain: float = 20.0
    balance_angle_deg: float = 25.0
    balance_gain_angle: float = DEFAULT_BALANCE_GAINS[0]
    balance_gain_angvel: float = DEFAULT_BALANCE_GAINS[1]
    balance_gain_pos: float = DEFAULT_BALANCE_GAINS[2]
    balance_gain_vel: float = DEFAULT_BALANCE_GAINS[3]
    deadband: float = 0.5
    edge_margin: float = 0.8
    drift_position_gain: float = 0.5
    pole_length: float = 0.975
    gravity: float = 9.81
    cart_mass: float = 1.0
    pole_mass: float = 0.3
    motor_force: float = 6.0
    step_duration: float = 0.1
    track_limit_mm: float = 390.0
    ang_vel_obs_scale: float = 40.0
    y_dot_obs_scale: float = 390.0

    def __post_init__(self) -> None:
        if not 0.0 < self.balance_angle_deg < 90.0:
            raise ConfigError("balance_angle_deg must lie in (0, 90)")
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value):
                raise ConfigError(f"{f.name} must be finite, got {value}")
        if self.deadband < 0:
            raise ConfigError("deadband must be >= 0")
        for name in _MODEL_FIELDS:
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0")

    @property
    def gains(self) -> np.ndarray:
        return np.array(
            [
                self.balance_gain_angle,
                self.balance_gain_angvel,
                self.balance_gain_pos,
                self.balance_gain_vel,
            ],
            dtype=float,
        )

    @property
    def braking_accel(self) -> float:
        """Deceleration of the cart under full opposing force, m/s^2."""
        return self.motor_force / (self.cart_mass + self.pole_mass)

    @classmethod
    def for_sim(cls, config: SimConfig, **overrides) -> "EnergyOracleParams":
        """Parameters with the model constants copied from ``config``."""
        values = {name: getattr(config, name) for name in _MODEL_FIELDS}
        values.update(overrides)
        return cls(**values)


def normalised_energy(observation: Observation, params: EnergyOracleParams) -> float:
    """Pole energy in units of m*g*l: 0 hanging at rest, 2 upright at rest."""
    theta = observation.u_norm * math.pi
    theta_dot = math.radians(observation.u_dot_obs * params.ang_vel_obs_scale)
    inertia_ratio = params.pole_length / (3.0 * params.gravity)
    return inertia_ratio * theta_dot**2 + 1.0 - math.cos(theta)


def stopping_position_mm(observation: Observation, params: EnergyOracleParams) -> float:
    """|y| the cart reaches if it coasts one step and then brakes at full force."""
    y = abs(observation.y_norm) * params.track_limit_mm
    speed = abs(observation.y_dot_obs) * params.y_dot_obs_scale
    braking = params.braking_accel * 1000.0
    return y + speed * params.step_duration + speed**2 / (2.0 * braking)


def centre_of_mass_drift(observation: Observation, params: EnergyOracleParams) -> float:
    """Centre-of-mass velocity plus ``drift_position_gain`` times its position, m/s.

    The horizontal momentum of cart and pole carries over to the cart once the pole
    stands still upright, so pumping is held back while this drift points the way
    the pump would push.
    """
    theta = observation.u_norm * math.pi
    theta_dot = math.radians(observation.u_dot_obs * params.ang_vel_obs_scale)
    lever = params.pole_mass * 0.5 * params.pole_length / (params.cart_mass + params.pole_mass)
    x = observation.y_norm * params.track_limit_mm / 1000.0
    x_dot = observation.y_dot_obs * params.y_dot_obs_scale / 1000.0
    velocity = x_dot + lever * math.cos(theta) * theta_dot
    position = x + lever * math.sin(theta)
    return velocity + params.drift_position_gain * position


def _to_action(command: float, deadband: float) -> Action:
    if command > deadband:
        return Action.Right
    if command < -deadband:
        return Action.Left
    return Action.NoOp


def energy_act(observation: Observation, params: EnergyOracleParams) -> Action:
    """Oracle action for one observation.

    A cart moving outwards that could not stop within ``edge_margin`` of the track
    half-width is pushed back first. Within ``balance_angle_deg`` of upright the
    quantised linear balance law is used. Elsewhere the cart pumps while the energy
    is short of the upright rest energy: the pump direction is
    ``-sign(u_dot * cos(u))`` (Right when that product is zero), and a pump stroke is
    only taken while the centre-of-mass drift does not point the same way.

    Raises:
        NumericError: on non-finite observations.
    """
    if not observation.is_finite():
        raise NumericError(f"non-finite observation: {observation}")

    if observation.y_norm * observation.y_dot_obs > 0 and (
        stopping_position_mm(observation, params) > params.edge_margin * params.track_limit_mm
    ):
        return Action.Left if observation.y_norm > 0 else Action.Right

    u_deg = observation.u_norm * 180.0
    phi_deg = u_deg - 180.0 if u_deg >= 0 else u_deg + 180.0
    if abs(phi_deg) < params.balance_angle_deg:
        state = np.array(
            [phi_deg / 180.0, observation.u_dot_obs, observation.y_norm, observation.y_dot_obs]
        )
        return _to_action(float(params.gains @ state), params.deadband)

    swing = observation.u_dot_obs * math.cos(observation.u_norm * math.pi)
    direction = -1.0 if swing > 0 else 1.0
    error = 2.0 - normalised_energy(observation, params)
    if (
        params.energy_gain * error > params.deadband
        and direction * centre_of_mass_drift(observation, params) <= 0
    ):
        return Action.Right if direction > 0 else Action.Left
    return Action.NoOp


class EnergyOracle(object):
    """Self-contained oracle policy for the swing-up task.

    Attributes:
        params: oracle parameters; by default the frozen gains with the model
            constants of ``sim_config``.
    """

    def __init__(
        self,
        params: EnergyOracleParams | None = None,
        sim_config: SimConfig | None = None,
    ) -> None:
        if params is None:
            sim_config = sim_config if sim_config is not None else SimConfig()
            params = EnergyOracleParams.for_sim(sim_config)
        logger.debug("energy oracle with gains %s", params.gains)
        self.params = params

    def act(self, observation: Observation) -> Action:
        return energy_act(observation, self.params)

    def __repr__(self) -> str:
        return f"EnergyOracle({self.params})"
