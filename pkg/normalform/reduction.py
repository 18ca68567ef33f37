import cmath
import logging
from typing import List, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from pydantic import BaseModel, Field

from cpoly import Quartic
from models import ModelHandle
from pipeline_steps.custom_exception import BranchFailure, NonGeneric

GENERICITY_THRESHOLD = 1e-8


class NormalFormResult:
    """
    Q(λ) = u·(λ̂⁴ + a·λ̂² + b·λ̂ + 1) with

        λ = shift0 + scale0·λ′,   λ′ = shift_hk + s·λ̂

    ``shift0``/``scale0`` are fixed by the model's critical root, ``shift_hk``
    removes the cubic term and ``s`` normalizes the constant coefficient.
    """

    def __init__(self, a: float, b: float, u: float, shift0: complex, scale0: float, shift_hk: float, s: float):
        self.a = a
        self.b = b
        self.u = u
        self.shift0 = shift0
        self.scale0 = scale0
        self.shift_hk = shift_hk
        self.s = s

    @property
    def h_hat(self) -> float:
        return self.a - 2.0

    @property
    def k_hat(self) -> float:
        return self.b

    def to_quartic(self) -> Quartic:
        """Map the normal form back through the recorded affine change."""
        normal = Polynomial([1.0, self.b, self.a, 0.0, 1.0])
        # λ̂ as an affine function of λ
        lam_hat = (Polynomial([-self.shift0, 1.0]) / self.scale0 - self.shift_hk) / self.s
        return Quartic.from_polynomial(self.u * normal(lam_hat))

    def __repr__(self) -> str:
        return f"NormalFormResult(a={self.a:.12g}, b={self.b:.12g}, u={self.u:.12g})"


class GenericityReport(BaseModel):
    """Jacobian of F = (ĥ, k̂); columns are d/dk and d/dh."""

    D: List[List[float]]
    det: float
    orientation: int
    passed: bool = Field(serialization_alias="pass")


def normalize_quartic(q: Quartic, lam0: complex) -> NormalFormResult:
    if not q.real_coeffs:
        raise ValueError("normal form reduction needs a real-coefficient quartic")
    shift0, scale0 = lam0.real, lam0.imag
    if scale0 <= 0:
        raise ValueError(f"critical root must lie in the upper half plane, got {lam0}")

    moved = q.as_polynomial()(Polynomial([shift0, scale0]))
    p1 = np.zeros(5, dtype=complex)
    p1[: len(moved.coef)] = moved.coef
    shift_hk = float((-p1[3] / (4 * p1[4])).real)
    p2 = Polynomial(p1)(Polynomial([shift_hk, 1.0]))
    c = np.zeros(5, dtype=complex)
    c[: len(p2.coef)] = p2.coef

    ratio = c[0] / c[4]
    if ratio.real <= 0 or abs(ratio.imag) > 1e-12 * abs(ratio):
        raise BranchFailure(f"a0/a4 = {ratio:.6g} has no positive fourth root")
    s = float(ratio.real ** 0.25)
    a = float((c[2] / (c[4] * s**2)).real)
    b = float((c[1] / (c[4] * s**3)).real)
    u = float((c[4] * s**4).real)
    return NormalFormResult(a, b, u, shift0, scale0, shift_hk, s)


def normal_form_quartic(h_hat: float, k_hat: float) -> Quartic:
    return Quartic([1.0, k_hat, 2.0 + h_hat, 0.0, 1.0])


def lemma_exchange_roots(h_hat: float, k_hat: float) -> Tuple[complex, complex]:
    """Leading-order roots near i of the normal form: i ± √((i·k̂ − ĥ)/4)."""
    offset = cmath.sqrt((1j * k_hat - h_hat) / 4)
    return 1j + offset, 1j - offset


def F_map(m: ModelHandle, h: float, k: float) -> Tuple[float, float]:
    result = normalize_quartic(m.spectral_coeffs(h, k), m.critical_root())
    return result.h_hat, result.k_hat


def default_step(m: ModelHandle) -> float:
    h0, k0 = m.critical_value()
    return 1e-5 * (abs(h0) + abs(k0) + 1)


def jacobian_F(m: ModelHandle, step: float = None) -> GenericityReport:
    if step is None:
        step = default_step(m)
    if step <= 0:
        raise ValueError(f"finite-difference step must be positive, got {step}")
    h0, k0 = m.critical_value()
    d_dk = (np.array(F_map(m, h0, k0 + step)) - np.array(F_map(m, h0, k0 - step))) / (2 * step)
    d_dh = (np.array(F_map(m, h0 + step, k0)) - np.array(F_map(m, h0 - step, k0))) / (2 * step)
    D = np.column_stack([d_dk, d_dh])
    det = float(np.linalg.det(D))
    return GenericityReport(
        D=D.tolist(),
        det=det,
        orientation=1 if det >= 0 else -1,
        passed=abs(det) > GENERICITY_THRESHOLD,
    )


def genericity_check(m: ModelHandle, step: float = None) -> GenericityReport:
    report = jacobian_F(m, step)
    logging.info(f"{m.get_name()}: det D = {report.det:.10g}, orientation {report.orientation:+d}")
    if not report.passed:
        raise NonGeneric(f"{m.get_name()}: |det D| = {abs(report.det):.3g} does not exceed {GENERICITY_THRESHOLD}")
    return report
