import cmath
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from pipeline_steps.custom_exception import DegenerateLeadingCoefficient

LEADING_COEFFICIENT_FLOOR = 1e-300


class Quartic:
    """
    Degree-4 complex polynomial a0 + a1*λ + a2*λ² + a3*λ³ + a4*λ⁴.

    ``coeffs`` is stored lowest degree first, the numpy.polynomial order.
    ``real_coeffs`` defaults to whether every imaginary part is exactly zero.
    """

    def __init__(self, coeffs: Sequence[complex], real_coeffs: Optional[bool] = None):
        values = np.asarray(coeffs, dtype=complex)
        if values.shape != (5,):
            raise ValueError(f"a quartic needs 5 coefficients, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("quartic coefficients must be finite")
        exactly_real = bool(np.all(values.imag == 0.0))
        if real_coeffs is None:
            real_coeffs = exactly_real
        if real_coeffs and not exactly_real:
            raise ValueError("real_coeffs set but coefficients have imaginary parts")
        self.coeffs = values
        self.real_coeffs = real_coeffs

    @classmethod
    def from_polynomial(cls, poly: Polynomial) -> "Quartic":
        values = np.zeros(5, dtype=complex)
        coef = np.asarray(poly.coef, dtype=complex)[:5]
        values[: len(coef)] = coef
        return cls(values)

    @property
    def a0(self) -> complex:
        return complex(self.coeffs[0])

    @property
    def a1(self) -> complex:
        return complex(self.coeffs[1])

    @property
    def a2(self) -> complex:
        return complex(self.coeffs[2])

    @property
    def a3(self) -> complex:
        return complex(self.coeffs[3])

    @property
    def a4(self) -> complex:
        return complex(self.coeffs[4])

    def scale(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def as_polynomial(self) -> Polynomial:
        return Polynomial(self.coeffs)

    def derivative_at(self, lam: complex) -> complex:
        a = self.coeffs
        return complex(((4 * a[4] * lam + 3 * a[3]) * lam + 2 * a[2]) * lam + a[1])

    def __call__(self, lam: complex) -> complex:
        return eval_poly(self, lam)

    def __repr__(self) -> str:
        terms = ", ".join(f"{c:.6g}" for c in self.coeffs)
        return f"Quartic([{terms}])"


class RootSet:
    """Four roots with multiplicity, in solver order."""

    def __init__(self, roots: Sequence[complex]):
        values = np.asarray(roots, dtype=complex)
        if values.shape != (4,):
            raise ValueError(f"a root set holds 4 roots, got {values.shape}")
        self.roots = values

    def __getitem__(self, index: int) -> complex:
        return complex(self.roots[index])

    def __len__(self) -> int:
        return 4

    def min_separation(self) -> float:
        diffs = np.abs(self.roots[:, None] - self.roots[None, :])
        return float(np.min(diffs[~np.eye(4, dtype=bool)]))

    def reconstruct(self, a4: complex) -> np.ndarray:
        """Coefficients of a4·∏(λ−rᵢ), lowest degree first."""
        return a4 * np.asarray(Polynomial.fromroots(self.roots).coef, dtype=complex)

    def __repr__(self) -> str:
        return "RootSet([" + ", ".join(f"{r:.6g}" for r in self.roots) + "])"


def eval_poly(q: Quartic, lam: complex) -> complex:
    a = q.coeffs
    return complex((((a[4] * lam + a[3]) * lam + a[2]) * lam + a[1]) * lam + a[0])


def _cubic_roots(b: complex, c: complex, d: complex) -> List[complex]:
    # z³ + b z² + c z + d = 0 via the depressed cubic and Cardano
    shift = b / 3
    p = c - b * b / 3
    q = 2 * b**3 / 27 - b * c / 3 + d
    disc = cmath.sqrt(q * q / 4 + p**3 / 27)
    w = -q / 2 + disc
    alt = -q / 2 - disc
    if abs(alt) > abs(w):
        w = alt
    if w == 0:
        return [-shift] * 3
    u = w ** (1.0 / 3.0)
    omega = complex(-0.5, np.sqrt(3.0) / 2)
    roots = []
    for k in range(3):
        uk = u * omega**k
        roots.append(uk - p / (3 * uk) - shift)
    return roots


def _polish(q: Quartic, root: complex) -> complex:
    value = eval_poly(q, root)
    slope = q.derivative_at(root)
    if value == 0 or slope == 0:
        return root
    candidate = root - value / slope
    if not cmath.isfinite(candidate):
        return root
    if abs(eval_poly(q, candidate)) < abs(value):
        return candidate
    return root


def solve_quartic(q: Quartic) -> RootSet:
    """
    Ferrari's method with a complex resolvent cubic, then one Newton step per
    root that is kept only when it lowers |Q|.
    """
    a4 = q.a4
    if abs(a4) < LEADING_COEFFICIENT_FLOOR:
        raise DegenerateLeadingCoefficient(f"|a4| = {abs(a4):.3g} below {LEADING_COEFFICIENT_FLOOR}")

    b = q.a3 / a4
    c = q.a2 / a4
    d = q.a1 / a4
    e = q.a0 / a4

    # depressed quartic y⁴ + p y² + r1 y + r0, λ = y − b/4
    p = c - 3 * b * b / 8
    r1 = d - b * c / 2 + b**3 / 8
    r0 = e - b * d / 4 + b * b * c / 16 - 3 * b**4 / 256
    shift = -b / 4

    resolvent = _cubic_roots(p, p * p / 4 - r0, -r1 * r1 / 8)
    m = max(resolvent, key=abs)
    s = cmath.sqrt(2 * m)

    size = max(1.0, abs(p), abs(r0) ** 0.5, abs(r1) ** (2.0 / 3.0))
    if abs(s) ** 2 <= 1e-14 * size:
        # biquadratic: y² = (−p ± √(p² − 4 r0))/2
        root_disc = cmath.sqrt(p * p - 4 * r0)
        y_sq = [(-p + root_disc) / 2, (-p - root_disc) / 2]
        ys = []
        for value in y_sq:
            y = cmath.sqrt(value)
            ys.extend([y, -y])
    else:
        t_plus = cmath.sqrt(-(2 * p + 2 * m + 2 * r1 / s))
        t_minus = cmath.sqrt(-(2 * p + 2 * m - 2 * r1 / s))
        ys = [
            (s + t_plus) / 2,
            (s - t_plus) / 2,
            (-s + t_minus) / 2,
            (-s - t_minus) / 2,
        ]

    roots = [_polish(q, y + shift) for y in ys]
    return RootSet(roots)


def companion_roots(q: Quartic) -> RootSet:
    """Eigenvalues of the companion matrix. Reference solver for tests."""
    if abs(q.a4) < LEADING_COEFFICIENT_FLOOR:
        raise DegenerateLeadingCoefficient(f"|a4| = {abs(q.a4):.3g} below {LEADING_COEFFICIENT_FLOOR}")
    companion = np.zeros((4, 4), dtype=complex)
    companion[1:, :3] = np.eye(3)
    companion[:, 3] = -q.coeffs[:4] / q.a4
    return RootSet(np.linalg.eigvals(companion))


def discriminant(q: Quartic) -> complex:
    a, b, c, d, e = q.a4, q.a3, q.a2, q.a1, q.a0
    return complex(
        256 * a**3 * e**3
        - 192 * a**2 * b * d * e**2
        - 128 * a**2 * c**2 * e**2
        + 144 * a**2 * c * d**2 * e
        - 27 * a**2 * d**4
        + 144 * a * b**2 * c * e**2
        - 6 * a * b**2 * d**2 * e
        - 80 * a * b * c**2 * d * e
        + 18 * a * b * c * d**3
        + 16 * a * c**4 * e
        - 4 * a * c**3 * d**2
        - 27 * b**4 * e**2
        + 18 * b**3 * c * d * e
        - 4 * b**3 * d**3
        - 4 * b**2 * c**3 * e
        + b**2 * c**2 * d**2
    )


def normalized_discriminant(q: Quartic) -> complex:
    """Discriminant divided by max|aᵢ|⁶, invariant under rescaling Q."""
    return discriminant(q) / q.scale() ** 6


def conjugate_pairs(roots: RootSet) -> List[Tuple[int, int]]:
    """
    Pair each root in the upper half plane with the lower root nearest its
    conjugate. Meant for real-coefficient quartics without real roots.
    """
    upper = [i for i in range(4) if roots.roots[i].imag > 0]
    lower = [i for i in range(4) if roots.roots[i].imag <= 0]
    if len(upper) != 2 or len(lower) != 2:
        raise ValueError(f"expected two roots in each half plane, got {roots}")
    pairs = []
    available = list(lower)
    for i in upper:
        target = np.conj(roots.roots[i])
        j = min(available, key=lambda idx: abs(roots.roots[idx] - target))
        available.remove(j)
        pairs.append((i, j))
    return pairs
