"""Cart-pole equations of motion and the fixed-step RK4 integrator.

The rod is uniform (centre of mass at L/2, inertia m*L^2/3 about the pivot), the cart is
force controlled, and both the cart and the hinge carry viscous friction. The angle theta is
measured from the hanging position, so the upright equilibrium is theta = pi.
"""

from __future__ import annotations

import math

import numpy as np

from cpsu_distill._jit import jit
from cpsu_distill.exceptions import NumericError
from cpsu_distill.sim.config import SimConfig
from cpsu_distill.sim.state import SimState


@jit
def _derivatives(x_dot, theta, theta_dot, force, M, m, L, g, b_c, b_p):
    l = 0.5 * L
    J = m * L * L / 3.0
    sin_t = math.sin(theta)
    cos_t = math.cos(theta)
    a11 = M + m
    a12 = m * l * cos_t
    det = a11 * J - a12 * a12
    r1 = force - b_c * x_dot + m * l * sin_t * theta_dot * theta_dot
    r2 = -m * g * l * sin_t - b_p * theta_dot
    x_acc = (r1 * J - a12 * r2) / det
    theta_acc = (a11 * r2 - a12 * r1) / det
    return x_dot, theta_dot, x_acc, theta_acc


@jit
def _rk4(x, theta, x_dot, theta_dot, force, h, n, M, m, L, g, b_c, b_p):
    for _ in range(n):
        k1 = _derivatives(x_dot, theta, theta_dot, force, M, m, L, g, b_c, b_p)
        k2 = _derivatives(
            x_dot + 0.5 * h * k1[2],
            theta + 0.5 * h * k1[1],
            theta_dot + 0.5 * h * k1[3],
            force, M, m, L, g, b_c, b_p,
        )
        k3 = _derivatives(
            x_dot + 0.5 * h * k2[2],
            theta + 0.5 * h * k2[1],
            theta_dot + 0.5 * h * k2[3],
            force, M, m, L, g, b_c, b_p,
        )
        k4 = _derivatives(
            x_dot + h * k3[2],
            theta + h * k3[1],
            theta_dot + h * k3[3],
            force, M, m, L, g, b_c, b_p,
        )
        x = x + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        theta = theta + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        x_dot = x_dot + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
        theta_dot = theta_dot + h / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])
    return x, theta, x_dot, theta_dot


def integrate_si(
    vector: np.ndarray, force: float, dt: float, config: SimConfig
) -> np.ndarray:
    """Advances ``[x, theta, x_dot, theta_dot]`` (SI units) by ``dt`` seconds.

    The RK4 step size is fixed at ``config.substep``; ``dt`` is covered by
    ``round(dt / substep)`` equal steps, so splitting ``dt`` in halves reproduces the
    same step sequence.

    Raises:
        ValueError: if dt is not positive.
        NumericError: if the input or the result holds non-finite values.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if not np.all(np.isfinite(vector)):
        raise NumericError(f"non-finite state before integration: {vector}")
    n = max(1, int(round(dt / config.substep)))
    h = dt / n
    x, theta, x_dot, theta_dot = (float(v) for v in vector)
    result = np.array(
        _rk4(
            x,
            theta,
            x_dot,
            theta_dot,
            float(force),
            h,
            n,
            config.cart_mass,
            config.pole_mass,
            config.pole_length,
            config.gravity,
            config.cart_friction,
            config.pivot_friction,
        )
    )
    if not np.all(np.isfinite(result)):
        raise NumericError(f"integration diverged to a non-finite state: {result}")
    return result


def integrate(state: SimState, force: float, dt: float, config: SimConfig) -> SimState:
    """Advances a simulator state by ``dt`` seconds under a constant cart force.

    Args:
        state: ground-truth state (degrees, millimetres).
        force: horizontal force on the cart in N.
        dt: duration in seconds.
        config: physical parameters.

    Returns:
        The new state with the angle wrapped to [-180, 180].
    """
    if not state.is_finite():
        raise NumericError(f"non-finite state: {state}")
    return SimState.from_si(integrate_si(state.to_si(), force, dt, config))


def mechanical_energy(state: SimState, config: SimConfig) -> float:
    """Total mechanical energy in J, zero for the system hanging at rest."""
    x, theta, x_dot, theta_dot = state.to_si()
    M, m, L, g = config.cart_mass, config.pole_mass, config.pole_length, config.gravity
    l = 0.5 * L
    J = m * L * L / 3.0
    kinetic = (
        0.5 * (M + m) * x_dot**2
        + m * l * x_dot * theta_dot * math.cos(theta)
        + 0.5 * J * theta_dot**2
    )
    return kinetic + m * g * l * (1.0 - math.cos(theta))


def small_angle_period(config: SimConfig) -> float:
    """Period in seconds of small frictionless oscillations about the hanging position.

    The cart is free, so the effective pendulum length is
    ``(J - (m*l)^2 / (M + m)) / (m*l)``.
    """
    M, m, L, g = config.cart_mass, config.pole_mass, config.pole_length, config.gravity
    l = 0.5 * L
    J = m * L * L / 3.0
    effective_length = (J - (m * l) ** 2 / (M + m)) / (m * l)
    return 2.0 * math.pi * math.sqrt(effective_length / g)
