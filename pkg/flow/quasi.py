import logging
import math
from typing import Iterable, List, NamedTuple

import numpy as np

from models import ModelHandle, ModelKind, get_model
from pipeline_steps.custom_exception import DegenerateFiber, NoReturn
from .integrator import DEFAULT_METHOD, DEFAULT_TOL, Trajectory, assemble, augment, check_conservation, solve_chunk

TRANSIT_HORIZON = 50.0
COLLAPSE_FRACTION = 1e-10


class QuasiTransit(NamedTuple):
    """Relative cycle of one quasi-Lax fiber inside the ball ‖a‖² + ‖b‖² ≤ R²."""

    times: np.ndarray
    states: np.ndarray
    lam: np.ndarray
    theta: complex
    t_entry: float
    t_exit: float

    @property
    def rotation(self) -> float:
        return self.theta.real


def _ball_events(m: ModelHandle, ball_radius: float):
    n = len(m.state_labels)
    limit = ball_radius**2

    def leave(t, y):
        return float(np.dot(y[:n], y[:n])) - limit

    leave.terminal = True
    leave.direction = 1

    def collapse(t, y):
        return float(np.dot(y[:n], y[:n])) - COLLAPSE_FRACTION * limit

    collapse.terminal = True
    collapse.direction = -1
    return [leave, collapse]


def _half_transit(m: ModelHandle, s0: np.ndarray, ball_radius: float, sign: float, tol: float, method: str) -> Trajectory:
    chunk = solve_chunk(m, augment(m, s0), (0.0, sign * TRANSIT_HORIZON), tol, method, events=_ball_events(m, ball_radius))
    if len(chunk.t_events[1]):
        raise DegenerateFiber(f"trajectory collapses onto the equilibrium at t = {chunk.t_events[1][0]:.6g}")
    if not len(chunk.t_events[0]):
        raise NoReturn(f"trajectory stays inside the ball of radius {ball_radius} up to |t| = {TRANSIT_HORIZON}")
    return assemble(m, [chunk], stop=float(chunk.t_events[0][0]), y_stop=chunk.y_events[0][0])


def quasi_transit_from_state(
    s0: np.ndarray,
    ball_radius: float = 1.0,
    tol: float = DEFAULT_TOL,
    method: str = DEFAULT_METHOD,
    model: ModelHandle = None,
) -> QuasiTransit:
    """
    Follow the quasi-Lax flow through ``s0`` backward to where it enters
    the ball and forward to where it leaves it; Θ = ∫ −λ̃ dt over the
    transit.
    """
    m = model or get_model(ModelKind.QUASI_LAX, {"ball_radius": ball_radius})
    s0 = np.asarray(s0, dtype=float)
    if float(np.dot(s0, s0)) >= ball_radius**2:
        raise ValueError("starting state must lie inside the ball")
    reference = m.em_map(s0)
    backward = _half_transit(m, s0, ball_radius, -1.0, tol, method)
    forward = _half_transit(m, s0, ball_radius, 1.0, tol, method)
    for half in (backward, forward):
        check_conservation(m, half, reference)

    times = np.concatenate([backward.times[::-1], forward.times[1:]])
    states = np.vstack([backward.states[::-1], forward.states[1:]])
    lam = np.array([m.reduced_lambda(state) for state in states])
    theta = complex(forward.theta[-1] - backward.theta[-1])
    return QuasiTransit(times, states, lam, theta, float(backward.times[-1]), float(forward.times[-1]))


def fiber_point(rho: float, phi: float):
    """(h, k) with h + i·k = ρ·e^{iφ}."""
    return rho * math.cos(phi), rho * math.sin(phi)


def _check_fiber(rho: float, phi: float, ball_radius: float):
    if not 0 < rho < ball_radius**2:
        raise ValueError(f"rho must lie in (0, R²) = (0, {ball_radius**2:.6g}), got {rho}")
    if abs(math.cos(phi)) < 1e-12 and math.sin(phi) < 0:
        raise DegenerateFiber(f"phi = {phi:.12g} gives h = 0, k < 0 where λ̃ passes through infinity")


def quasi_transit(
    rho: float,
    phi: float,
    ball_radius: float = 1.0,
    tol: float = DEFAULT_TOL,
    method: str = DEFAULT_METHOD,
) -> QuasiTransit:
    _check_fiber(rho, phi, ball_radius)
    m = get_model(ModelKind.QUASI_LAX, {"ball_radius": ball_radius})
    h, k = fiber_point(rho, phi)
    return quasi_transit_from_state(m.seed_state(h, k), ball_radius, tol, method, model=m)


def quasi_relative_rotation(
    rho: float,
    phi: float,
    ball_radius: float = 1.0,
    tol: float = DEFAULT_TOL,
    method: str = DEFAULT_METHOD,
) -> float:
    return quasi_transit(rho, phi, ball_radius, tol, method).rotation


def quasi_delta_rotation(
    rho: float,
    eps: float,
    ball_radius: float = 1.0,
    tol: float = DEFAULT_TOL,
    method: str = DEFAULT_METHOD,
) -> float:
    """
    Variation of the relative rotation along the counterclockwise loop in
    the (k, h) plane, from just after the ray h = 0, k < 0 to just before it.
    """
    if not 0 < eps < math.pi / 2:
        raise ValueError(f"eps must lie in (0, π/2), got {eps}")
    start = quasi_relative_rotation(rho, -math.pi / 2 + eps, ball_radius, tol, method)
    end = quasi_relative_rotation(rho, 3 * math.pi / 2 - eps, ball_radius, tol, method)
    return start - end


def quasi_rotation_closed_form(rho: float, phi: float, ball_radius: float = 1.0) -> float:
    _check_fiber(rho, phi, ball_radius)
    half_time = 0.5 * math.acosh(ball_radius**2 / rho)
    return 2 * math.atan(math.tanh(half_time) * math.tan(math.pi / 4 - phi / 2))


def quasi_sweep(rho: float, eps_values: Iterable[float], ball_radius: float = 1.0, tol: float = DEFAULT_TOL) -> List[dict]:
    """One row per ε with the numeric and closed-form variation."""
    rows = []
    for eps in eps_values:
        delta = quasi_delta_rotation(rho, eps, ball_radius, tol)
        closed = quasi_rotation_closed_form(rho, -math.pi / 2 + eps, ball_radius) - quasi_rotation_closed_form(
            rho, 3 * math.pi / 2 - eps, ball_radius
        )
        rows.append(
            {
                "eps": eps,
                "delta": delta,
                "closed_form": closed,
                "error": abs(delta - 2 * math.pi),
            }
        )
        logging.info(f"quasi: rho={rho:.6g} eps={eps:.6g} delta={delta:.10g}")
    return rows
