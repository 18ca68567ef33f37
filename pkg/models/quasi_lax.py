import math
from typing import Tuple

import numpy as np
from pydantic import Field

from cpoly import Quartic
from .base import (
    EMValue,
    IntegrableModel,
    ModelKind,
    ModelParams,
    OneFormCoeffs,
    ReducedPoint,
)


class QuasiLaxParams(ModelParams):
    ball_radius: float = Field(1.0, gt=0, description="radius R of the neighbourhood V")


class QuasiLaxModel(IntegrableModel):
    """
    Local model of the 1:−1 resonance: H = ab + āb̄, K = |b|² − |a|², with
    ȧ = −i·b̄ and ḃ = −i·ā. States are (Re a, Im a, Re b, Im b).

    Its Lax pair holds only up to cubic terms, so μ̃² differs from the
    printed quartic by a²ā²/4 and the curve is read in the reflected chart
    λ̃ → −λ̃ (see ``spectral_defect``).
    """

    kind = ModelKind.QUASI_LAX
    state_labels = ("re_a", "im_a", "re_b", "im_b")

    def __init__(self, params: QuasiLaxParams = None):
        super().__init__(params or QuasiLaxParams())
        self.ball_radius = self.params.ball_radius

    @staticmethod
    def split(state: np.ndarray) -> Tuple[complex, complex]:
        return complex(state[0], state[1]), complex(state[2], state[3])

    def energy_momentum(self, state: np.ndarray) -> EMValue:
        a, b = self.split(state)
        return EMValue(2.0 * (a * b).real, abs(b) ** 2 - abs(a) ** 2)

    def constraint_residual(self, state: np.ndarray) -> float:
        return 0.0

    def vector_field(self, t: float, state: np.ndarray) -> np.ndarray:
        re_a, im_a, re_b, im_b = state
        return np.array([-im_b, -re_b, -im_a, -re_a])

    def seed_state(self, h: float, k: float) -> np.ndarray:
        """Point with b = β real, β² = (k + √(k² + h²))/2, and a = h/(2β)."""
        beta2 = 0.5 * (k + math.hypot(h, k))
        if beta2 <= 1e-300:
            # h = 0, k ≤ 0: the fiber meets b = 0
            return np.array([math.sqrt(max(-k, 0.0)), 0.0, 0.0, 0.0])
        beta = math.sqrt(beta2)
        return np.array([h / (2 * beta), 0.0, beta, 0.0])

    def characteristic_time(self) -> float:
        return 2 * math.pi

    def spectral_coeffs(self, h: float, k: float) -> Quartic:
        return Quartic([1.0, -h, 2.0 + k, 0.0, 1.0])

    def critical_value(self) -> EMValue:
        return EMValue(0.0, 0.0)

    def critical_root(self) -> complex:
        return 1j

    def rotation_one_form(self) -> OneFormCoeffs:
        # −λ dλ / (i(1 + λ²)), poles at ±i
        return OneFormCoeffs(-1.0, 0.0, basis=False, denominator_lead=1j)

    def theta_dot(self, lam: complex) -> complex:
        return -lam

    def lambda_dot(self, point: ReducedPoint) -> complex:
        return 1j * (1 + point.lam**2)

    def spectral_defect(self, state: np.ndarray) -> complex:
        h, k = self.energy_momentum(state)
        point = self.reduce(state)
        return point.mu**2 - self.spectral_coeffs(h, k)(-point.lam)

    def _lambda_fraction(self, state: np.ndarray) -> Tuple[complex, complex]:
        a, b = self.split(state)
        return -a, b.conjugate()

    def _mu(self, lam: complex, state: np.ndarray) -> complex:
        a, _ = self.split(state)
        return lam * lam + 1 - abs(a) ** 2 / 2
