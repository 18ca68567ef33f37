import cmath
import math

import numpy as np

from cpoly import solve_quartic
from models import ModelHandle, OneFormCoeffs

MIN_NODES = 512


def residue_at_infinity(xi: OneFormCoeffs, a4: complex) -> complex:
    """
    Res(ξ, +∞) = −c1/√a4 on the sheet where μ ~ +√a4·λ², principal root.
    Rational forms outside the basis use their denominator's leading
    coefficient in place of √a4.
    """
    if xi.basis:
        if a4 == 0:
            raise ValueError("leading coefficient a4 must be nonzero")
        return -xi.c1 / cmath.sqrt(complex(a4))
    return -xi.c1 / complex(xi.denominator_lead)


def variation_of_integral(xi: OneFormCoeffs, a4: complex) -> complex:
    return 2j * math.pi * residue_at_infinity(xi, a4)


def numeric_residue(
    m: ModelHandle,
    h: float,
    k: float,
    xi: OneFormCoeffs,
    r_big: float,
    n_nodes: int = 1024,
) -> complex:
    """
    Trapezoidal quadrature of ξ on |λ| = r_big, counterclockwise, on the
    sheet μ ~ +√a4·λ², returned as the residue at +∞ (sign flipped).
    """
    if not xi.basis:
        raise ValueError("numeric residue needs a form in the λdλ/μ, dλ/μ basis")
    if n_nodes < MIN_NODES:
        raise ValueError(f"at least {MIN_NODES} nodes needed, got {n_nodes}")
    q = m.spectral_coeffs(h, k)
    largest = float(np.max(np.abs(solve_quartic(q).roots)))
    if r_big <= 2 * largest:
        raise ValueError(f"radius {r_big} must exceed twice the largest root modulus {largest:.6g}")

    angles = 2 * np.pi * np.arange(n_nodes) / n_nodes
    lam = r_big * np.exp(1j * angles)
    a4 = q.a4
    values = np.polynomial.polynomial.polyval(lam, q.coeffs)
    # Q/(a4 λ⁴) stays near 1 on the circle, so the principal root is continuous
    mu = cmath.sqrt(a4) * lam**2 * np.sqrt(values / (a4 * lam**4))
    integrand = (xi.c1 * lam + xi.c2) / mu * 1j * lam
    contour = integrand.sum() * (2 * np.pi / n_nodes)
    return complex(-contour / (2j * np.pi))
