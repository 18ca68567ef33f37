import math
from typing import Tuple

import numpy as np
from numpy.polynomial import Polynomial
from pydantic import Field, field_validator
from scipy.optimize import minimize_scalar

from cpoly import Quartic
from pipeline_steps.custom_exception import FiberEmpty
from .base import (
    EMValue,
    IntegrableModel,
    ModelKind,
    ModelParams,
    OneFormCoeffs,
    ReducedPoint,
)

SQRT2 = math.sqrt(2.0)
CASIMIR_RENORMALIZATION = 1e-9


class JaynesCummingsParams(ModelParams):
    omega0: float = Field(1.0, description="spin frequency ω0")
    omega: float = Field(2.0, description="oscillator frequency ω")
    g: float = Field(1.0, description="coupling strength")
    s0: float = Field(1.0, gt=0, description="spin length S0")

    @field_validator("g")
    @classmethod
    def coupling_nonzero(cls, value: float) -> float:
        if value == 0:
            raise ValueError("coupling g must be nonzero")
        return value


class JaynesCummingsModel(IntegrableModel):
    """
    Classical Jaynes-Cummings system: a spin S of length S0 coupled to one
    oscillator mode b = (q + i p)/√2.

        H = 2ω0·Sz + ω|b|² + g(b·S₊ + b̄·S₋)
        K = Sz + |b|²

    The state vector is (Sx, Sy, Sz, q, p) with {Sa, Sb} = ε_abc Sc and
    {q, p} = 1.
    """

    kind = ModelKind.JAYNES_CUMMINGS
    state_labels = ("Sx", "Sy", "Sz", "q", "p")

    def __init__(self, params: JaynesCummingsParams = None):
        super().__init__(params or JaynesCummingsParams())
        p = self.params
        self.omega0 = p.omega0
        self.omega = p.omega
        self.g = p.g
        self.s0 = p.s0

    def energy_momentum(self, state: np.ndarray) -> EMValue:
        sx, sy, sz, q, p = state
        radius2 = 0.5 * (q * q + p * p)
        h = 2 * self.omega0 * sz + self.omega * radius2 + self.g * SQRT2 * (q * sx - p * sy)
        return EMValue(float(h), float(sz + radius2))

    def constraint_residual(self, state: np.ndarray) -> float:
        sx, sy, sz = state[:3]
        return abs(sx * sx + sy * sy + sz * sz - self.s0**2)

    def vector_field(self, t: float, state: np.ndarray) -> np.ndarray:
        sx, sy, sz, q, p = state
        grad = np.array([self.g * SQRT2 * q, -self.g * SQRT2 * p, 2 * self.omega0])
        spin_dot = np.cross(grad, state[:3])
        q_dot = self.omega * p - self.g * SQRT2 * sy
        p_dot = -self.omega * q - self.g * SQRT2 * sx
        return np.array([spin_dot[0], spin_dot[1], spin_dot[2], q_dot, p_dot])

    def project(self, state: np.ndarray) -> np.ndarray:
        state = np.array(state, dtype=float)
        norm = np.linalg.norm(state[:3])
        if norm > 0 and abs(norm - self.s0) > CASIMIR_RENORMALIZATION * self.s0:
            state[:3] *= self.s0 / norm
        return state

    def fixed_point(self) -> np.ndarray:
        return np.array([0.0, 0.0, self.s0, 0.0, 0.0])

    def seed_state(self, h: float, k: float) -> np.ndarray:
        """
        Point of the fiber with b = β real and positive. Sz is chosen where
        the room left for Sy is largest, then Sy ≥ 0 closes the Casimir.
        """
        low, high = -self.s0, min(self.s0, k)
        if high <= low:
            raise FiberEmpty(f"jc: no spin state with Sz <= k = {k}")

        def sx_of(sz: float) -> Tuple[float, float]:
            beta = math.sqrt(k - sz)
            energy_left = h - 2 * self.omega0 * sz - self.omega * (k - sz)
            return beta, energy_left / (2 * self.g * beta)

        def negative_slack(sz: float) -> float:
            if k - sz <= 0:
                return 1e300
            _, sx = sx_of(sz)
            return sx * sx + sz * sz - self.s0**2

        found = minimize_scalar(
            negative_slack,
            bounds=(low, high),
            method="bounded",
            options={"xatol": 1e-13},
        )
        sz = float(found.x)
        slack = -negative_slack(sz)
        if slack < 0 or k - sz <= 0:
            raise FiberEmpty(f"jc: fiber over (h, k) = ({h}, {k}) not found on the b-real slice")
        beta, sx = sx_of(sz)
        sy = math.sqrt(max(slack, 0.0))
        return np.array([sx, sy, sz, SQRT2 * beta, 0.0])

    def characteristic_time(self) -> float:
        rate = max(abs(self.omega), 2 * abs(self.omega0), abs(self.g) * math.sqrt(2 * self.s0))
        return 2 * math.pi / rate

    def spectral_coeffs(self, h: float, k: float) -> Quartic:
        g2 = self.g**2
        y = Polynomial([-self.omega0, 1.0])
        lam = Polynomial([0.0, 1.0])
        q = (
            (2 * lam - self.omega) ** 2 * y**2 / g2**2
            + 4 * k * y**2 / g2
            + 2 * (h - self.omega * k) * y / g2
            + self.s0**2
        )
        return Quartic(np.real(q.coef))

    def critical_value(self) -> EMValue:
        return EMValue(2 * self.omega0 * self.s0, self.s0)

    def critical_root(self) -> complex:
        detuning = (self.omega - 2 * self.omega0) / 4
        im_part2 = self.g**2 * self.s0 / 2 - detuning**2
        if im_part2 <= 0:
            raise ValueError("jc parameters put the critical value outside the focus-focus range")
        return complex((2 * self.omega0 + self.omega) / 4, math.sqrt(im_part2))

    def rotation_one_form(self) -> OneFormCoeffs:
        ig2 = 1j * self.g**2
        return OneFormCoeffs(-2 / ig2, (self.omega + 2 * self.omega0) / ig2)

    def theta_dot(self, lam: complex) -> complex:
        return self.omega + 2 * self.omega0 - 2 * lam

    def lambda_dot(self, point: ReducedPoint) -> complex:
        return 1j * self.g**2 * point.mu

    def _lambda_fraction(self, state: np.ndarray) -> Tuple[complex, complex]:
        sx, sy, _, q, p = state
        s_plus = complex(sx, sy)
        b_bar = complex(q, -p) / SQRT2
        # λ̃ = ω0 − (g/2)·S₊/b̄
        return self.omega0 * b_bar - 0.5 * self.g * s_plus, b_bar

    def _mu(self, lam: complex, state: np.ndarray) -> complex:
        x = 2 * (self.omega0 - lam) / self.g
        detuning = (self.omega - 2 * self.omega0) / (2 * self.g)
        return detuning * x + 0.5 * x * x + state[2]
