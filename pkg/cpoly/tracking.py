import itertools
import logging
from typing import Callable, List, Sequence, Tuple

import numpy as np

from pipeline_steps.custom_exception import NotClosed, RefinementExhausted
from .quartic import Quartic, RootSet, solve_quartic

MAX_BISECTION_DEPTH = 20
CLOSURE_TOLERANCE = 1e-12

_ALL_ASSIGNMENTS = np.array(list(itertools.permutations(range(4))), dtype=int)


class Permutation4:
    """
    Bijection of {0, 1, 2, 3}. ``image[i]`` is the index that root ``i`` is
    sent to.
    """

    def __init__(self, image: Sequence[int]):
        image = tuple(int(i) for i in image)
        if sorted(image) != [0, 1, 2, 3]:
            raise ValueError(f"not a permutation of 0..3: {image}")
        self.image = image

    @classmethod
    def identity(cls) -> "Permutation4":
        return cls((0, 1, 2, 3))

    def then(self, other: "Permutation4") -> "Permutation4":
        """Apply ``self`` first and ``other`` second."""
        return Permutation4(tuple(other.image[i] for i in self.image))

    def inverse(self) -> "Permutation4":
        inverse = [0] * 4
        for i, j in enumerate(self.image):
            inverse[j] = i
        return Permutation4(inverse)

    def is_identity(self) -> bool:
        return self.image == (0, 1, 2, 3)

    def cycles(self) -> List[Tuple[int, ...]]:
        seen = set()
        cycles = []
        for start in range(4):
            if start in seen:
                continue
            cycle = [start]
            seen.add(start)
            nxt = self.image[start]
            while nxt != start:
                cycle.append(nxt)
                seen.add(nxt)
                nxt = self.image[nxt]
            if len(cycle) > 1:
                cycles.append(tuple(cycle))
        return cycles

    def cycle_notation(self) -> str:
        cycles = self.cycles()
        if not cycles:
            return "()"
        return "".join("(" + " ".join(str(i) for i in cycle) + ")" for cycle in cycles)

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation4) and self.image == other.image

    def __hash__(self) -> int:
        return hash(self.image)

    def __repr__(self) -> str:
        return f"Permutation4({self.image})"


class RootTrack:
    def __init__(
        self,
        params: List[float],
        quartics: List[Quartic],
        rootsets: List[RootSet],
        step_perms: List[Permutation4],
        quality: List[float],
    ):
        self.params = params
        self.quartics = quartics
        self.rootsets = rootsets
        self.step_perms = step_perms
        self.quality = quality

    def tracked_roots(self) -> np.ndarray:
        """
        Array of shape (n, 4); column i follows the root that starts at
        index i of the first RootSet.
        """
        index = list(range(4))
        rows = [self.rootsets[0].roots.copy()]
        for perm, rootset in zip(self.step_perms, self.rootsets[1:]):
            index = [perm.image[i] for i in index]
            rows.append(rootset.roots[index])
        return np.array(rows)

    def __len__(self) -> int:
        return len(self.params)


def match_roots(prev: RootSet, next: RootSet) -> Tuple[Permutation4, float]:
    """
    Brute-force the 24 assignments of ``prev`` onto ``next`` by total squared
    displacement. ``quality`` is second best cost over best cost.
    """
    cost = np.abs(prev.roots[:, None] - next.roots[None, :]) ** 2
    totals = cost[np.arange(4), _ALL_ASSIGNMENTS].sum(axis=1)
    order = np.argsort(totals, kind="stable")
    best, second = totals[order[0]], totals[order[1]]
    quality = float("inf") if best == 0 else float(second / best)
    return Permutation4(_ALL_ASSIGNMENTS[order[0]]), quality


def _step_accepted(prev: RootSet, next: RootSet, perm: Permutation4, quality: float, guard: float) -> bool:
    if quality < guard:
        return False
    displacement = np.max(np.abs(next.roots[list(perm.image)] - prev.roots))
    return bool(displacement < guard * prev.min_separation())


def track_roots(
    coeff_path: Callable[[float], Quartic],
    n_samples: int,
    guard: float = 3.0,
) -> RootTrack:
    """
    Follow the four roots of ``coeff_path(s)`` for s in [0, 1].

    Every step between consecutive samples is bisected until the matching is
    unambiguous (quality >= guard) and no root moves by more than guard times
    the smallest root separation. Passing through a double root cannot be
    resolved and ends in RefinementExhausted.
    """
    if n_samples < 16:
        raise ValueError(f"n_samples must be at least 16, got {n_samples}")
    if guard <= 1:
        raise ValueError(f"guard must exceed 1, got {guard}")

    grid = np.linspace(0.0, 1.0, n_samples)
    start_q = coeff_path(float(grid[0]))
    params = [float(grid[0])]
    quartics = [start_q]
    rootsets = [solve_quartic(start_q)]
    step_perms: List[Permutation4] = []
    quality: List[float] = []
    refinements = 0

    def advance(s_b: float, q_b: Quartic, roots_b: RootSet, depth: int):
        nonlocal refinements
        s_a, roots_a = params[-1], rootsets[-1]
        perm, ratio = match_roots(roots_a, roots_b)
        if _step_accepted(roots_a, roots_b, perm, ratio, guard):
            params.append(s_b)
            quartics.append(q_b)
            rootsets.append(roots_b)
            step_perms.append(perm)
            quality.append(ratio)
            return
        if depth >= MAX_BISECTION_DEPTH:
            raise RefinementExhausted(
                f"root matching unresolved between s={s_a:.12g} and s={s_b:.12g} "
                f"after {MAX_BISECTION_DEPTH} bisections (quality {ratio:.3g})"
            )
        refinements += 1
        s_mid = 0.5 * (s_a + s_b)
        q_mid = coeff_path(s_mid)
        advance(s_mid, q_mid, solve_quartic(q_mid), depth + 1)
        advance(s_b, q_b, roots_b, depth + 1)

    for s in grid[1:]:
        q = coeff_path(float(s))
        advance(float(s), q, solve_quartic(q), 0)

    logging.debug(f"track_roots: {n_samples} samples, {refinements} bisections, {len(params)} points")
    return RootTrack(params, quartics, rootsets, step_perms, quality)


def loop_permutation(track: RootTrack) -> Permutation4:
    """
    Compose the step permutations along a closed track and close it with a
    final match from the last RootSet back onto the first one.
    """
    first, last = track.quartics[0], track.quartics[-1]
    scale = max(1.0, first.scale())
    gap = float(np.max(np.abs(first.coeffs - last.coeffs)))
    if gap > CLOSURE_TOLERANCE * scale:
        raise NotClosed(f"loop endpoints differ by {gap:.3g} in the coefficients")

    total = Permutation4.identity()
    for perm in track.step_perms:
        total = total.then(perm)
    closing, _ = match_roots(track.rootsets[-1], track.rootsets[0])
    return total.then(closing)


def is_conjugate_pair_exchange(perm: Permutation4, roots: RootSet) -> bool:
    """
    True when ``perm`` swaps the two roots of the upper half plane with each
    other and the two of the lower half plane with each other.
    """
    upper = {i for i in range(4) if roots.roots[i].imag > 0}
    lower = set(range(4)) - upper
    if len(upper) != 2:
        return False
    cycles = [set(cycle) for cycle in perm.cycles()]
    return len(cycles) == 2 and upper in cycles and lower in cycles


def classify_permutation(perm: Permutation4, roots: RootSet) -> str:
    if perm.is_identity():
        return "identity"
    if is_conjugate_pair_exchange(perm, roots):
        return "double_transposition"
    return "other"
