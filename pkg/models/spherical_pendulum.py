import math
from typing import Tuple

import numpy as np
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


class SphericalPendulumParams(ModelParams):
    pass


class SphericalPendulumModel(IntegrableModel):
    """
    Unit spherical pendulum in T S², H = |p|²/2 + z and K = x·py − y·px.
    States are (x, y, z, px, py, pz) with |q| = 1 and q·p = 0.
    """

    kind = ModelKind.SPHERICAL_PENDULUM
    state_labels = ("x", "y", "z", "px", "py", "pz")

    def __init__(self, params: SphericalPendulumParams = None):
        super().__init__(params or SphericalPendulumParams())

    def energy_momentum(self, state: np.ndarray) -> EMValue:
        x, y, z, px, py, pz = state
        h = 0.5 * (px * px + py * py + pz * pz) + z
        return EMValue(float(h), float(x * py - y * px))

    def constraint_residual(self, state: np.ndarray) -> float:
        q, p = state[:3], state[3:]
        return max(abs(float(q @ q) - 1.0), abs(float(q @ p)))

    def vector_field(self, t: float, state: np.ndarray) -> np.ndarray:
        q, p = state[:3], state[3:]
        # tension keeps d(q·p)/dt = 0 on the sphere
        tension = q[2] - p @ p
        p_dot = tension * q
        p_dot[2] -= 1.0
        return np.concatenate([p, p_dot])

    def project(self, state: np.ndarray) -> np.ndarray:
        state = np.array(state, dtype=float)
        q = state[:3] / np.linalg.norm(state[:3])
        p = state[3:] - (q @ state[3:]) * q
        return np.concatenate([q, p])

    def fixed_point(self) -> np.ndarray:
        return np.array([0.0, 0.0, 1.0, 0.0, 0.0, 0.0])

    def seed_state(self, h: float, k: float) -> np.ndarray:
        """
        Point of the fiber on the meridian y = 0, x ≥ 0, at the bottom of the
        effective potential V(ϑ) = k²/(2 sin²ϑ) + cos ϑ with p_ϑ ≥ 0.
        """

        def potential(angle: float) -> float:
            return k * k / (2 * math.sin(angle) ** 2) + math.cos(angle)

        if k == 0:
            angle = math.pi
            floor = -1.0
        else:
            found = minimize_scalar(
                potential,
                bounds=(1e-9, math.pi - 1e-9),
                method="bounded",
                options={"xatol": 1e-13},
            )
            angle = float(found.x)
            floor = potential(angle)
        if h < floor - 1e-12:
            raise FiberEmpty(f"sp: energy {h} below the effective potential minimum {floor:.12g}")
        p_angle = math.sqrt(max(2 * (h - floor), 0.0))
        sin_a, cos_a = math.sin(angle), math.cos(angle)
        p_azimuth = k / sin_a if k != 0 else 0.0
        q = np.array([sin_a, 0.0, cos_a])
        e_angle = np.array([cos_a, 0.0, -sin_a])
        e_azimuth = np.array([0.0, 1.0, 0.0])
        return np.concatenate([q, p_angle * e_angle + p_azimuth * e_azimuth])

    def characteristic_time(self) -> float:
        return 2 * math.pi

    def spectral_coeffs(self, h: float, k: float) -> Quartic:
        return Quartic([1.0, 0.0, 2.0 * h, -2.0 * k, 1.0])

    def critical_value(self) -> EMValue:
        return EMValue(1.0, 0.0)

    def critical_root(self) -> complex:
        return 1j

    def rotation_one_form(self) -> OneFormCoeffs:
        return OneFormCoeffs(1j, 0.0)

    def theta_dot(self, lam: complex) -> complex:
        return lam

    def lambda_dot(self, point: ReducedPoint) -> complex:
        return -1j * point.mu

    @staticmethod
    def angular_momentum(state: np.ndarray) -> np.ndarray:
        return np.cross(state[:3], state[3:])

    def _lambda_fraction(self, state: np.ndarray) -> Tuple[complex, complex]:
        momentum = self.angular_momentum(state)
        return complex(state[0], state[1]), complex(momentum[0], momentum[1])

    def _mu(self, lam: complex, state: np.ndarray) -> complex:
        kz = self.angular_momentum(state)[2]
        return state[2] - lam * kz + lam * lam
