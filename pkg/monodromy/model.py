import math
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from cpoly import Quartic
from models import EMValue


class PipelineStepType(Enum):
    GENERICITY_CHECK = "genericity_check"
    ROOT_EXCHANGE = "root_exchange"
    RESIDUE_CHECK = "residue_check"


class LoopSpec(BaseModel):
    """
    Circle of radius ``radius`` around ``center`` (h, k), parametrized as
    k = k0 + r·cos χ, h = h0 + r·sin χ. orientation +1 runs counterclockwise
    in the (k, h) plane.
    """

    model_config = ConfigDict(frozen=True)

    center: EMValue
    radius: float = Field(gt=0)
    n_samples: int = Field(512, ge=16)
    orientation: int = 1

    @field_validator("orientation")
    @classmethod
    def orientation_is_a_sign(cls, value: int) -> int:
        if value not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        return value

    def point(self, chi: float) -> EMValue:
        h0, k0 = self.center
        return EMValue(h0 + self.radius * math.sin(chi), k0 + self.radius * math.cos(chi))

    def point_at(self, s: float, direction: int = 1) -> EMValue:
        """Point at loop fraction s ∈ [0, 1], traversed along ``direction``·orientation."""
        return self.point(2 * math.pi * s * direction * self.orientation)

    def coefficient_path(self, model, direction: int = 1) -> Callable[[float], Quartic]:
        """s ↦ spectral quartic of ``model`` at loop fraction s."""

        def coeff_path(s: float) -> Quartic:
            h, k = self.point_at(s, direction)
            return model.spectral_coeffs(h, k)

        return coeff_path

    def sample_angles(self, n: Optional[int] = None) -> np.ndarray:
        """n angles at cell midpoints, so no sample sits on the axis k = k0."""
        n = n or self.n_samples
        return self.orientation * 2 * np.pi * (np.arange(n) + 0.5) / n


class MonodromyMatrix(BaseModel):
    """Integer matrix acting on the basis (γ_K, γ_H)."""

    entries: Tuple[Tuple[int, int], Tuple[int, int]]
    basis: str = "(gamma_K, gamma_H)"

    @field_validator("entries")
    @classmethod
    def unimodular(cls, value):
        (a, b), (c, d) = value
        if a * d - b * c != 1:
            raise ValueError("monodromy matrix must have determinant 1")
        return value

    @classmethod
    def identity(cls) -> "MonodromyMatrix":
        return cls(entries=((1, 0), (0, 1)))

    @classmethod
    def focus_focus(cls) -> "MonodromyMatrix":
        return cls(entries=((1, 1), (0, 1)))

    def as_lists(self) -> List[List[int]]:
        return [list(row) for row in self.entries]


class MonodromyChecks(BaseModel):
    genericity: bool = False
    permutation: bool = False
    residue: bool = False


class MonodromyVerdict(BaseModel):
    model: str
    loop: Dict[str, float]
    matrix: Optional[List[List[int]]] = None
    permutation: Optional[str] = None
    permutation_class: Optional[str] = None
    residue: Optional[Dict[str, float]] = None
    det_D: Optional[float] = None
    orientation: Optional[int] = None
    checks: MonodromyChecks = MonodromyChecks()
    status: str = "ok"
    error: Optional[str] = None
