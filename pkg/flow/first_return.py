import logging
from typing import NamedTuple, Tuple

import numpy as np

from models import ModelHandle, ModelKind
from pipeline_steps.custom_exception import NoReturn, ToleranceFailure
from .integrator import (
    DEFAULT_METHOD,
    DEFAULT_TOL,
    Trajectory,
    assemble,
    augment,
    check_conservation,
    solve_chunk,
)

EXCLUSION_WINDOW = 0.1
HORIZON = 1e4
CANDIDATE_CLOSURE = 1e-4
RETURN_CLOSURE = 1e-7
THETA_IM_TOLERANCE = 1e-6


class ReturnData(NamedTuple):
    T: float
    theta: float
    theta_im_defect: float


def _require_closed_cycle(m: ModelHandle):
    if m.kind == ModelKind.QUASI_LAX:
        raise ValueError("quasi-Lax fibers have no first return; use quasi_transit")


def first_return(
    m: ModelHandle,
    s0: np.ndarray,
    tol: float = DEFAULT_TOL,
    method: str = DEFAULT_METHOD,
) -> Tuple[float, Trajectory]:
    """
    Time T at which the reduced point (λ̃, μ̃) first comes back to its
    starting value, and the trajectory over [0, T].

    The section is the line through λ̃(0) orthogonal to dλ̃/dt(0). Upward
    crossings inside the exclusion window 0.1·t_char are skipped; later ones
    qualify when λ̃ and μ̃ close loosely, and the crossing must then close
    to RETURN_CLOSURE. The horizon grows by doubling chunks up to
    1e4·t_char.
    """
    _require_closed_cycle(m)
    s0 = m.project(np.asarray(s0, dtype=float))
    if np.linalg.norm(m.vector_field(0.0, s0)) < 1e-14:
        raise NoReturn(f"{m.get_name()}: state is an equilibrium, the flow does not move")

    n = len(m.state_labels)
    reference = m.em_map(s0)
    start = m.reduce(s0)
    velocity = m.lambda_dot(start)
    t_char = m.characteristic_time()
    lam_scale = max(1.0, abs(start.lam))
    mu_scale = max(1.0, abs(start.mu))

    def section(t, y):
        return ((m.reduced_lambda(y[:n]) - start.lam) * np.conj(velocity)).real

    section.direction = 1

    chunks = []
    y0 = augment(m, s0)
    t0, span = 0.0, 2.0 * t_char
    while t0 < HORIZON * t_char:
        chunk = solve_chunk(m, y0, (t0, t0 + span), tol, method, events=section)
        for t_event, y_event in zip(chunk.t_events[0], chunk.y_events[0]):
            if t_event < EXCLUSION_WINDOW * t_char:
                continue
            lam = m.reduced_lambda(y_event[:n])
            if abs(lam - start.lam) > CANDIDATE_CLOSURE * lam_scale:
                continue
            mu = m.reduce(y_event[:n]).mu
            if abs(mu - start.mu) > CANDIDATE_CLOSURE * mu_scale:
                continue
            closure = abs(lam - start.lam)
            if closure >= RETURN_CLOSURE * lam_scale:
                raise ToleranceFailure(
                    f"{m.get_name()}: reduced orbit closes only to {closure:.3g} at t = {t_event:.12g}"
                )
            traj = assemble(m, chunks + [chunk], stop=float(t_event), y_stop=y_event)
            check_conservation(m, traj, reference)
            logging.debug(f"{m.get_name()}: first return at T = {t_event:.12g}, closure {closure:.3g}")
            return float(t_event), traj
        chunks.append(chunk)
        t0 = float(chunk.t[-1])
        y0 = chunk.y[:, -1]
        span *= 2

    raise NoReturn(f"{m.get_name()}: no return of the reduced orbit before t = {HORIZON * t_char:.6g}")


def return_data(traj: Trajectory) -> ReturnData:
    theta = complex(traj.theta[-1] - traj.theta[0])
    defect = abs(theta.imag)
    if defect >= THETA_IM_TOLERANCE:
        raise ToleranceFailure(f"imaginary part of the rotation angle does not cancel: {defect:.3g}")
    return ReturnData(traj.duration, theta.real, defect)
