from typing import Any, Dict, Optional, Union

import numpy as np

from cpoly import Quartic
from .base import (
    EMValue,
    IntegrableModel,
    ModelKind,
    ModelParams,
    OneFormCoeffs,
    ReducedPoint,
)
from .jaynes_cummings import JaynesCummingsModel, JaynesCummingsParams
from .quasi_lax import QuasiLaxModel, QuasiLaxParams
from .spherical_pendulum import SphericalPendulumModel, SphericalPendulumParams

ModelHandle = IntegrableModel

MODEL_REGISTRY = {
    ModelKind.JAYNES_CUMMINGS: (JaynesCummingsModel, JaynesCummingsParams),
    ModelKind.SPHERICAL_PENDULUM: (SphericalPendulumModel, SphericalPendulumParams),
    ModelKind.QUASI_LAX: (QuasiLaxModel, QuasiLaxParams),
}


def get_model(kind: Union[str, ModelKind], params: Optional[Dict[str, Any]] = None) -> IntegrableModel:
    model_cls, params_cls = MODEL_REGISTRY[ModelKind(kind)]
    return model_cls(params_cls.model_validate(params or {}))


def em_map(m: ModelHandle, s: np.ndarray) -> EMValue:
    return m.em_map(np.asarray(s, dtype=float))


def hamiltonian_vector_field(m: ModelHandle, s: np.ndarray) -> np.ndarray:
    return m.vector_field(0.0, np.asarray(s, dtype=float))


def spectral_coeffs(m: ModelHandle, h: float, k: float) -> Quartic:
    return m.spectral_coeffs(h, k)


def reduce(m: ModelHandle, s: np.ndarray) -> ReducedPoint:
    return m.reduce(np.asarray(s, dtype=float))


def theta_dot(m: ModelHandle, lam: complex) -> complex:
    return m.theta_dot(lam)


def rotation_one_form(m: ModelHandle) -> OneFormCoeffs:
    return m.rotation_one_form()


def critical_value(m: ModelHandle) -> EMValue:
    return m.critical_value()


def critical_root(m: ModelHandle) -> complex:
    return m.critical_root()


def seed_state(m: ModelHandle, h: float, k: float) -> np.ndarray:
    return m.seed_state(h, k)


def reduced_velocity(m: ModelHandle, s: np.ndarray) -> complex:
    return m.reduced_velocity(np.asarray(s, dtype=float))


def spectral_defect(m: ModelHandle, s: np.ndarray) -> complex:
    return m.spectral_defect(np.asarray(s, dtype=float))
