import cmath
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from cpoly import conjugate_pairs, solve_quartic
from models import ModelHandle
from .first_return import first_return
from .integrator import DEFAULT_METHOD, DEFAULT_TOL

GAUSS_NODES = 1024


def winding_numbers(path: Sequence[complex], roots: Sequence[complex]) -> List[int]:
    """Winding number of the closed polygon ``path`` around each point of ``roots``."""
    path = np.asarray(path, dtype=complex)
    if path[0] != path[-1]:
        path = np.append(path, path[0])
    windings = []
    for root in roots:
        phase = np.unwrap(np.angle(path - root))
        windings.append(int(round((phase[-1] - phase[0]) / (2 * np.pi))))
    return windings


class WindingReport(BaseModel):
    h: float
    k: float
    roots: List[Tuple[float, float]]
    windings: List[int]
    pairs: List[Tuple[int, int]]
    encircled_pair: Optional[int] = None
    orientation: int = 0
    passed: bool = False


def _roots_and_pairs(m: ModelHandle, h: float, k: float):
    roots = solve_quartic(m.spectral_coeffs(h, k))
    return roots.roots, conjugate_pairs(roots)


def winding_check(
    m: ModelHandle,
    h: float,
    k: float,
    tol: float = DEFAULT_TOL,
    method: str = DEFAULT_METHOD,
) -> WindingReport:
    """
    Winding of the first-return reduced cycle λ̃(t), t ∈ [0, T], around the
    branch points of the spectral curve. Passes when it winds ±1 around
    both roots of one conjugate pair and 0 around the other pair.
    """
    _, traj = first_return(m, m.seed_state(h, k), tol, method)
    path = traj.refined_lambda()
    roots, pairs = _roots_and_pairs(m, h, k)
    windings = winding_numbers(path, roots)

    report = WindingReport(
        h=h,
        k=k,
        roots=[(float(r.real), float(r.imag)) for r in roots],
        windings=windings,
        pairs=pairs,
    )
    for index, (i, j) in enumerate(pairs):
        (p, q), (r, s) = (i, j), pairs[1 - index]
        if windings[p] == windings[q] and abs(windings[p]) == 1 and windings[r] == windings[s] == 0:
            report.encircled_pair = index
            report.orientation = windings[p]
            report.passed = True
    logging.info(f"{m.get_name()}: windings {windings} around roots at (h, k) = ({h:.6g}, {k:.6g})")
    return report


def cut_integral(m: ModelHandle, h: float, k: float, upper_root: complex, n_nodes: int = GAUSS_NODES) -> complex:
    """
    ∮ ξ around the straight cut from conj(r) to r, r = ``upper_root``.

    On λ = Re r + i·Im r·sin φ the factor √((λ−r)(λ−r̄)) cancels against
    dλ, so the integrand is smooth in φ and Gauss–Legendre applies. The
    remaining square root is continued from one end of the cut; the overall
    sign (the sheet) stays arbitrary.
    """
    xi = m.rotation_one_form()
    if not xi.basis:
        raise ValueError("cut integral needs a form in the λdλ/μ, dλ/μ basis")
    q = m.spectral_coeffs(h, k)
    roots = solve_quartic(q).roots
    upper_index = int(np.argmin(np.abs(roots - upper_root)))
    remaining = [i for i in range(4) if i != upper_index]
    conj_index = min(remaining, key=lambda i: abs(roots[i] - np.conj(upper_root)))
    others = roots[[i for i in remaining if i != conj_index]]

    nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
    phi = 0.5 * np.pi * nodes
    lam = upper_root.real + 1j * upper_root.imag * np.sin(phi)
    rest = (lam - others[0]) * (lam - others[1])
    g = np.empty_like(rest)
    g[0] = cmath.sqrt(rest[0])
    for index in range(1, len(rest)):
        candidate = cmath.sqrt(rest[index])
        g[index] = candidate if abs(candidate - g[index - 1]) <= abs(candidate + g[index - 1]) else -candidate
    integrand = 1j * (xi.c1 * lam + xi.c2) / (cmath.sqrt(q.a4) * g)
    return complex(2 * 0.5 * np.pi * np.sum(weights * integrand))


def abelian_rotation(
    m: ModelHandle,
    h: float,
    k: float,
    tol: float = DEFAULT_TOL,
    method: str = DEFAULT_METHOD,
) -> complex:
    """
    Independent value of Θ as an Abelian integral: ξ integrated around the
    cut joining the conjugate pair that the reduced cycle encircles.
    Equal to Θ up to sign.
    """
    report = winding_check(m, h, k, tol, method)
    if not report.passed:
        raise ValueError(f"reduced cycle does not encircle a single conjugate pair: windings {report.windings}")
    roots, pairs = _roots_and_pairs(m, h, k)
    i, j = pairs[report.encircled_pair]
    upper = roots[i] if roots[i].imag > 0 else roots[j]
    return report.orientation * cut_integral(m, h, k, complex(upper))
