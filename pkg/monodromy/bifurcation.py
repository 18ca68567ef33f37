import logging
import math
from typing import Dict, List, NamedTuple, Tuple

import numpy as np
from scipy.optimize import minimize

from cpoly import normalized_discriminant, solve_quartic
from models import EMValue, ModelHandle

ZERO_THRESHOLD = 1e-8
MERGE_DISTANCE = 1e-6
MIN_GRID = 16
SUPERSEDE_CELLS = 1.5
BOUNDARY = "boundary-candidate"
FOCUS_FOCUS = "focus-focus-candidate"
REGULAR = "regular"


class BifurcationCandidate(NamedTuple):
    point: EMValue
    kind: str
    abs_discriminant: float
    refined: bool = False


class BifurcationScan(NamedTuple):
    candidates: List[BifurcationCandidate]
    grid: List[Dict[str, float]]


def _abs_disc(m: ModelHandle, h: float, k: float) -> float:
    return abs(normalized_discriminant(m.spectral_coeffs(h, k)))


def classify_point(m: ModelHandle, h: float, k: float) -> str:
    """
    Look at the two closest roots: a real coalescence is a boundary point,
    a coalescence off the real axis a focus-focus point.
    """
    q = m.spectral_coeffs(h, k)
    roots = solve_quartic(q).roots
    best, pair = math.inf, (0, 1)
    for i in range(4):
        for j in range(i + 1, 4):
            gap = abs(roots[i] - roots[j])
            if gap < best:
                best, pair = gap, (i, j)
    midpoint = 0.5 * (roots[pair[0]] + roots[pair[1]])
    scale = max(1.0, float(np.max(np.abs(roots))))
    return FOCUS_FOCUS if abs(midpoint.imag) > 1e-6 * scale else BOUNDARY


def _refine(m: ModelHandle, h: float, k: float, dh: float, dk: float) -> Tuple[float, float, float]:
    simplex = np.array([[h, k], [h + 0.5 * dh, k], [h, k + 0.5 * dk]])
    result = minimize(
        lambda x: _abs_disc(m, x[0], x[1]),
        np.array([h, k]),
        method="Nelder-Mead",
        options={"initial_simplex": simplex, "xatol": 1e-12, "fatol": 1e-16, "maxiter": 4000},
    )
    return float(result.x[0]), float(result.x[1]), float(result.fun)


def discriminant_scan(
    m: ModelHandle,
    h_range: Tuple[float, float],
    k_range: Tuple[float, float],
    n: int = 64,
) -> BifurcationScan:
    """
    Grid scan of the normalized discriminant of Q_{h,k}.

    Sign changes between neighbouring nodes flag boundary crossings. Interior
    local minima of |disc| are refined with Nelder-Mead and kept when the
    refined value drops below ZERO_THRESHOLD; these catch the even-order
    zeros of complex double roots that never change sign. A refined zero
    supersedes the flagged nodes of the same class within 1.5 cells.
    """
    if n < MIN_GRID:
        raise ValueError(f"grid needs at least {MIN_GRID} nodes per axis, got {n}")
    (h_lo, h_hi), (k_lo, k_hi) = h_range, k_range
    if not (h_hi > h_lo and k_hi > k_lo):
        raise ValueError("scan ranges must be increasing")
    hs = np.linspace(h_lo, h_hi, n)
    ks = np.linspace(k_lo, k_hi, n)
    dh, dk = hs[1] - hs[0], ks[1] - ks[0]
    disc = np.array([[normalized_discriminant(m.spectral_coeffs(h, k)).real for k in ks] for h in hs])
    magnitude = np.abs(disc)

    flagged: Dict[Tuple[int, int], str] = {}
    candidates: List[BifurcationCandidate] = []

    def add(h: float, k: float, value: float):
        for other in candidates:
            if math.hypot(other.point.h - h, other.point.k - k) < MERGE_DISTANCE:
                return
        candidates.append(BifurcationCandidate(EMValue(h, k), classify_point(m, h, k), value))

    def near(c: BifurcationCandidate, h: float, k: float) -> bool:
        return abs(c.point.h - h) <= SUPERSEDE_CELLS * dh and abs(c.point.k - k) <= SUPERSEDE_CELLS * dk

    def add_refined(h: float, k: float, value: float):
        # a refined zero replaces the flagged nodes of its class around it
        kind = classify_point(m, h, k)
        if any(c.refined and c.kind == kind and near(c, h, k) for c in candidates):
            return
        candidates[:] = [c for c in candidates if c.refined or c.kind != kind or not near(c, h, k)]
        candidates.append(BifurcationCandidate(EMValue(h, k), kind, value, refined=True))

    sign = np.sign(disc)
    for i in range(n):
        for j in range(n):
            if magnitude[i, j] < ZERO_THRESHOLD:
                flagged[(i, j)] = classify_point(m, hs[i], ks[j])
                add(float(hs[i]), float(ks[j]), float(magnitude[i, j]))
                continue
            for di, dj in ((1, 0), (0, 1)):
                ni, nj = i + di, j + dj
                if ni < n and nj < n and sign[i, j] * sign[ni, nj] < 0:
                    # the node with smaller |disc| sits nearer the zero set
                    target = (i, j) if magnitude[i, j] <= magnitude[ni, nj] else (ni, nj)
                    if target not in flagged:
                        flagged[target] = classify_point(m, hs[target[0]], ks[target[1]])
                        add(float(hs[target[0]]), float(ks[target[1]]), float(magnitude[target]))

    for i in range(1, n - 1):
        for j in range(1, n - 1):
            window = magnitude[i - 1 : i + 2, j - 1 : j + 2]
            if magnitude[i, j] > window.min():
                continue
            h_star, k_star, value = _refine(m, float(hs[i]), float(ks[j]), dh, dk)
            if value >= ZERO_THRESHOLD:
                continue
            if abs(h_star - hs[i]) > 1.5 * dh or abs(k_star - ks[j]) > 1.5 * dk:
                continue
            flagged.setdefault((i, j), classify_point(m, h_star, k_star))
            add_refined(h_star, k_star, value)

    grid = [
        {
            "h": float(hs[i]),
            "k": float(ks[j]),
            "log10_abs_discriminant": math.log10(magnitude[i, j]) if magnitude[i, j] > 0 else -math.inf,
            "class": flagged.get((i, j), REGULAR),
        }
        for i in range(n)
        for j in range(n)
    ]
    logging.info(f"{m.get_name()}: bifurcation scan on {n}x{n} grid found {len(candidates)} candidate(s)")
    return BifurcationScan(candidates, grid)


def bifurcation_scan(
    m: ModelHandle,
    h_range: Tuple[float, float],
    k_range: Tuple[float, float],
    n: int = 64,
) -> List[Tuple[EMValue, str]]:
    return [(c.point, c.kind) for c in discriminant_scan(m, h_range, k_range, n).candidates]
