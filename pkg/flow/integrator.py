import cmath
import logging
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.integrate import OdeSolution, solve_ivp

from models import EMValue, ModelHandle, ReducedPoint
from pipeline_steps.custom_exception import ToleranceFailure

DEFAULT_TOL = 1e-10
DEFAULT_METHOD = "RK45"
DRIFT_TOLERANCE = 1e-8


class Trajectory:
    """
    Solution of the Hamiltonian flow together with the accumulated complex
    rotation angle θ(t). ``states`` are the projected phase states at the
    solver's own steps; ``segments`` keep the dense output of every chunk.
    """

    def __init__(
        self,
        model: ModelHandle,
        times: np.ndarray,
        states: np.ndarray,
        theta: np.ndarray,
        segments: List[OdeSolution],
    ):
        self.model = model
        self.times = np.asarray(times, dtype=float)
        self.states = np.asarray(states, dtype=float)
        self.theta = np.asarray(theta, dtype=complex)
        self.segments = segments
        self._reduced: Optional[List[ReducedPoint]] = None

    @property
    def reduced(self) -> List[ReducedPoint]:
        if self._reduced is None:
            self._reduced = [self.model.reduce(state) for state in self.states]
        return self._reduced

    @property
    def lam(self) -> np.ndarray:
        return np.array([point.lam for point in self.reduced])

    @property
    def mu(self) -> np.ndarray:
        return np.array([point.mu for point in self.reduced])

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    def dense_states(self, times: Sequence[float]) -> np.ndarray:
        """Phase states at arbitrary times inside the trajectory's span."""
        n = self.states.shape[1]
        out = np.empty((len(times), n))
        for row, t in enumerate(times):
            solution = self._segment_for(t)
            out[row] = self.model.project(solution(t)[:n])
        return out

    def refined_lambda(self, per_step: int = 4) -> np.ndarray:
        """λ̃ at the solver steps and ``per_step`` − 1 dense points inside each step."""
        t = self.times
        inner = [np.linspace(a, b, per_step, endpoint=False) for a, b in zip(t[:-1], t[1:])]
        times = np.concatenate(inner + [t[-1:]])
        return np.array([self.model.reduced_lambda(state) for state in self.dense_states(times)])

    def _segment_for(self, t: float) -> OdeSolution:
        for solution in self.segments:
            lo, hi = sorted((solution.t_min, solution.t_max))
            if lo <= t <= hi:
                return solution
        raise ValueError(f"t = {t} outside the integrated span")

    def __len__(self) -> int:
        return len(self.times)


def augmented_rhs(m: ModelHandle) -> Callable[[float, np.ndarray], np.ndarray]:
    """Phase-space flow plus two components carrying Re θ and Im θ."""
    n = len(m.state_labels)

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        dy = np.empty_like(y)
        dy[:n] = m.vector_field(t, y[:n])
        rate = complex(m.theta_dot(m.reduced_lambda(y[:n])))
        if not cmath.isfinite(rate):
            # λ̃ at infinity: θ is frozen there
            rate = 0j
        dy[n] = rate.real
        dy[n + 1] = rate.imag
        return dy

    return rhs


def solve_chunk(
    m: ModelHandle,
    y0: np.ndarray,
    t_span: Sequence[float],
    tol: float = DEFAULT_TOL,
    method: str = DEFAULT_METHOD,
    events=None,
):
    """One call of solve_ivp on the augmented system, failures mapped to ToleranceFailure."""
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    solution = solve_ivp(
        augmented_rhs(m),
        t_span,
        y0,
        method=method,
        rtol=tol,
        atol=tol * 1e-2,
        dense_output=True,
        events=events,
    )
    if solution.status == -1:
        raise ToleranceFailure(f"{m.get_name()}: integration failed at t = {solution.t[-1]:.6g}: {solution.message}")
    return solution


def augment(m: ModelHandle, s0: np.ndarray) -> np.ndarray:
    return np.concatenate([m.project(np.asarray(s0, dtype=float)), [0.0, 0.0]])


def assemble(m: ModelHandle, chunks, stop: Optional[float] = None, y_stop: Optional[np.ndarray] = None) -> Trajectory:
    """
    Join consecutive solve_ivp results. When ``stop`` is given the last chunk
    is cut there and ``y_stop`` appended as the final sample.
    """
    n = len(m.state_labels)
    times, values = [], []
    for index, chunk in enumerate(chunks):
        t, y = chunk.t, chunk.y.T
        if index > 0:
            t, y = t[1:], y[1:]
        if stop is not None and index == len(chunks) - 1:
            direction = 1.0 if chunk.t[-1] >= chunk.t[0] else -1.0
            keep = (t - stop) * direction < 0
            t, y = np.append(t[keep], stop), np.vstack([y[keep], y_stop])
        times.append(t)
        values.append(y)
    times = np.concatenate(times)
    values = np.vstack(values)
    states = np.array([m.project(row[:n]) for row in values])
    theta = values[:, n] + 1j * values[:, n + 1]
    return Trajectory(m, times, states, theta, [chunk.sol for chunk in chunks])


def check_conservation(m: ModelHandle, traj: Trajectory, reference: Optional[EMValue] = None) -> float:
    """Largest drift of (H, K) along ``traj``; ToleranceFailure beyond the bound."""
    values = np.array([m.energy_momentum(state) for state in traj.states])
    h, k = reference if reference is not None else values[0]
    drift = float(np.max(np.abs(values - np.array([h, k]))))
    bound = DRIFT_TOLERANCE * (1 + abs(h) + abs(k))
    if drift > bound:
        raise ToleranceFailure(f"{m.get_name()}: (H, K) drifted by {drift:.3g}, bound {bound:.3g}")
    return drift


def integrate(
    m: ModelHandle,
    s0: np.ndarray,
    t_max: float,
    tol: float = DEFAULT_TOL,
    method: str = DEFAULT_METHOD,
) -> Trajectory:
    """
    Integrate the Hamiltonian flow of ``m`` from ``s0`` over [0, t_max]
    (t_max may be negative). The recorded states are projected back onto
    the constraint manifold and the drift of H and K is checked.
    """
    if t_max == 0:
        raise ValueError("t_max must be nonzero")
    s0 = np.asarray(s0, dtype=float)
    reference = m.em_map(s0)
    chunk = solve_chunk(m, augment(m, s0), (0.0, t_max), tol, method)
    traj = assemble(m, [chunk])
    drift = check_conservation(m, traj, reference)
    logging.debug(f"{m.get_name()}: integrated {len(traj)} steps to t = {t_max:.6g}, drift {drift:.3g}")
    return traj
