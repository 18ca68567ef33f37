from abc import ABC, abstractmethod
from enum import Enum
from typing import NamedTuple, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from cpoly import Quartic
from pipeline_steps.custom_exception import AtInfinity, ConstraintViolation

CONSTRAINT_TOLERANCE = 1e-6
INFINITY_THRESHOLD = 1e-12


class ModelKind(str, Enum):
    JAYNES_CUMMINGS = "jc"
    SPHERICAL_PENDULUM = "sp"
    QUASI_LAX = "quasi"


class EMValue(NamedTuple):
    h: float
    k: float


class ReducedPoint(NamedTuple):
    lam: complex
    mu: complex


class OneFormCoeffs(NamedTuple):
    """
    ξ = c1·λdλ/μ + c2·dλ/μ. Forms that are not in this basis (``basis`` is
    False) are rational, (c1·λ + c2)dλ over a quadratic denominator whose
    leading coefficient is ``denominator_lead``.
    """

    c1: complex
    c2: complex
    basis: bool = True
    denominator_lead: complex = 1.0


class ModelParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class IntegrableModel(ABC):
    """
    A two-degree-of-freedom integrable system with a quartic spectral curve
    μ² = Q_{h,k}(λ). Instances are immutable once built and act as the
    model handle passed to every operation.
    """

    kind: ModelKind
    state_labels: Tuple[str, ...]

    def __init__(self, params: ModelParams):
        self.params = params

    def get_name(self) -> str:
        return self.kind.value

    # phase space

    @abstractmethod
    def energy_momentum(self, state: np.ndarray) -> EMValue:
        """(H, K) without any constraint check."""

    @abstractmethod
    def constraint_residual(self, state: np.ndarray) -> float:
        """Largest violation of the phase-space constraints, 0 if none."""

    @abstractmethod
    def vector_field(self, t: float, state: np.ndarray) -> np.ndarray:
        """Hamiltonian vector field of H, in the (t, y) form of solve_ivp."""

    def project(self, state: np.ndarray) -> np.ndarray:
        return np.array(state, dtype=float)

    @abstractmethod
    def seed_state(self, h: float, k: float) -> np.ndarray:
        pass

    @abstractmethod
    def characteristic_time(self) -> float:
        pass

    # spectral data

    @abstractmethod
    def spectral_coeffs(self, h: float, k: float) -> Quartic:
        pass

    @abstractmethod
    def critical_value(self) -> EMValue:
        pass

    @abstractmethod
    def critical_root(self) -> complex:
        """Double root of Q at the critical value, in the upper half plane."""

    @abstractmethod
    def rotation_one_form(self) -> OneFormCoeffs:
        pass

    @abstractmethod
    def theta_dot(self, lam: complex) -> complex:
        pass

    @abstractmethod
    def lambda_dot(self, point: ReducedPoint) -> complex:
        """Closed-form time derivative of λ̃ on the reduced curve."""

    @abstractmethod
    def _lambda_fraction(self, state: np.ndarray) -> Tuple[complex, complex]:
        """Numerator and denominator of λ̃."""

    @abstractmethod
    def _mu(self, lam: complex, state: np.ndarray) -> complex:
        pass

    def reduced_lambda(self, state: np.ndarray) -> complex:
        """λ̃ without the AtInfinity check; used inside integrators."""
        numerator, denominator = self._lambda_fraction(state)
        if denominator == 0:
            return complex(np.inf, np.inf)
        return numerator / denominator

    def reduce(self, state: np.ndarray) -> ReducedPoint:
        numerator, denominator = self._lambda_fraction(state)
        if abs(denominator) < INFINITY_THRESHOLD:
            raise AtInfinity(
                f"{self.get_name()}: λ̃ denominator {abs(denominator):.3g} below {INFINITY_THRESHOLD}"
            )
        lam = numerator / denominator
        return ReducedPoint(lam, self._mu(lam, state))

    def spectral_defect(self, state: np.ndarray) -> complex:
        h, k = self.energy_momentum(state)
        point = self.reduce(state)
        return point.mu**2 - self.spectral_coeffs(h, k)(point.lam)

    def em_map(self, state: np.ndarray) -> EMValue:
        residual = self.constraint_residual(state)
        if residual > CONSTRAINT_TOLERANCE:
            raise ConstraintViolation(
                f"{self.get_name()}: state violates its constraints by {residual:.3g}"
            )
        return self.energy_momentum(state)

    def reduced_velocity(self, state: np.ndarray, step: float = None) -> complex:
        """dλ̃/dt by a central difference along the vector field."""
        state = np.asarray(state, dtype=float)
        if step is None:
            step = 1e-6 * self.characteristic_time()
        flow = self.vector_field(0.0, state)
        forward = self.reduced_lambda(state + step * flow)
        backward = self.reduced_lambda(state - step * flow)
        return (forward - backward) / (2 * step)

    def fixed_point(self) -> np.ndarray:
        return np.zeros(len(self.state_labels))

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.params!r})"

