import logging
import math
from typing import List, NamedTuple

from models import ModelHandle
from monodromy.model import LoopSpec
from pipeline_steps.custom_exception import UnwrapFailure
from pipeline_steps.util import performance_monitor
from .first_return import ReturnData, first_return, return_data
from .integrator import DEFAULT_METHOD, DEFAULT_TOL

MAX_UNWRAP_DEPTH = 10
# adjacent samples further apart than this (mod 2π) are refined
UNWRAP_JUMP = math.pi / 2


def rotation_number(
    m: ModelHandle,
    h: float,
    k: float,
    tol: float = DEFAULT_TOL,
    method: str = DEFAULT_METHOD,
) -> ReturnData:
    """Θ = ∫₀^T θ̇ dt over one first return on the fiber (h, k)."""
    s0 = m.seed_state(h, k)
    _, traj = first_return(m, s0, tol, method)
    return return_data(traj)


class LoopRotation(NamedTuple):
    s: List[float]
    chi: List[float]
    h: List[float]
    k: List[float]
    theta_raw: List[float]
    theta_unwrapped: List[float]

    @property
    def delta(self) -> float:
        return self.theta_unwrapped[-1] - self.theta_unwrapped[0]

    def rows(self) -> List[dict]:
        return [
            {"s": s, "h": h, "k": k, "theta_unwrapped": theta}
            for s, h, k, theta in zip(self.s, self.h, self.k, self.theta_unwrapped)
        ]


def _wrap(angle: float) -> float:
    return (angle + math.pi) % (2 * math.pi) - math.pi


def rotation_along_loop(
    m: ModelHandle,
    loop: LoopSpec,
    tol: float = DEFAULT_TOL,
    method: str = DEFAULT_METHOD,
) -> LoopRotation:
    """
    Θ on loop.n_samples fibers of the loop, continued by continuity.

    Between neighbouring samples Θ may jump by 2π where the seed's return
    orbit changes its lift; such jumps are removed modulo 2π. A step that is
    not clearly smaller than UNWRAP_JUMP after wrapping gets a midpoint
    sample, recursively up to MAX_UNWRAP_DEPTH.
    """
    angles = loop.sample_angles()
    chi_start = float(angles[0])
    sweep = 2 * math.pi * loop.orientation

    def theta_at(chi: float) -> float:
        h, k = loop.point(chi)
        return rotation_number(m, h, k, tol, method).theta

    with performance_monitor(f"rotation_along_loop[{m.get_name()}]"):
        raw = [theta_at(float(chi)) for chi in angles]
        chis = [float(chi) for chi in angles] + [chi_start + sweep]
        raw.append(raw[0])

        out_chi, out_raw, out_unwrapped = [chis[0]], [raw[0]], [raw[0]]

        def refine(chi_a: float, theta_a: float, chi_b: float, theta_b: float, depth: int):
            step = _wrap(theta_b - theta_a)
            if abs(step) < UNWRAP_JUMP:
                out_chi.append(chi_b)
                out_raw.append(theta_b)
                out_unwrapped.append(out_unwrapped[-1] + step)
                return
            if depth >= MAX_UNWRAP_DEPTH:
                raise UnwrapFailure(
                    f"{m.get_name()}: rotation jumps by {step:.3g} between chi = {chi_a:.9g} and {chi_b:.9g}"
                )
            chi_mid = 0.5 * (chi_a + chi_b)
            theta_mid = theta_at(chi_mid)
            refine(chi_a, theta_a, chi_mid, theta_mid, depth + 1)
            refine(chi_mid, theta_mid, chi_b, theta_b, depth + 1)

        for index in range(len(chis) - 1):
            refine(chis[index], raw[index], chis[index + 1], raw[index + 1], 0)

    points = [loop.point(chi) for chi in out_chi]
    result = LoopRotation(
        s=[(chi - chi_start) / sweep for chi in out_chi],
        chi=out_chi,
        h=[p.h for p in points],
        k=[p.k for p in points],
        theta_raw=out_raw,
        theta_unwrapped=out_unwrapped,
    )
    logging.info(f"{m.get_name()}: loop variation of the rotation number {result.delta:.10g}")
    return result


def delta_rotation_loop(
    m: ModelHandle,
    loop: LoopSpec,
    tol: float = DEFAULT_TOL,
    method: str = DEFAULT_METHOD,
) -> float:
    return rotation_along_loop(m, loop, tol, method).delta
