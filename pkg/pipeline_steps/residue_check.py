import logging
from time import time
from typing import Dict, Any

from models import ModelHandle
from monodromy.model import LoopSpec, PipelineStepType
from monodromy.pipeline import PipelineStep, PipelineStepOutput
from monodromy.residue import residue_at_infinity
from pipeline_steps.custom_exception import ResidueMismatch
from pipeline_steps.util import complex_to_dict

EXPECTED_RESIDUE = 1 / 1j
RESIDUE_TOLERANCE = 1e-8


class ResidueCheckPipelineStep(PipelineStep):
    """Checks Res(ξ, +∞) = 1/i at the loop center."""

    def get_type(self) -> PipelineStepType:
        return PipelineStepType.RESIDUE_CHECK

    def get_name(self) -> str:
        return self.name

    def __init__(self):
        super().__init__()
        self.name = "ResidueCheckPipelineStep"

    def run(
        self,
        model: ModelHandle,
        loop: LoopSpec,
        data: Dict[str, Any],
    ) -> PipelineStepOutput:
        h0, k0 = loop.center
        input = {"h": h0, "k": k0}
        start = time()
        try:
            xi = model.rotation_one_form()
            residue = residue_at_infinity(xi, model.spectral_coeffs(h0, k0).a4)
            error = None
            if abs(residue - EXPECTED_RESIDUE) >= RESIDUE_TOLERANCE:
                error = ResidueMismatch(f"Res(xi, +inf) = {residue:.12g}, expected 1/i")
            return PipelineStepOutput(
                step_type=self.get_type(),
                data={"residue": complex_to_dict(residue)},
                input=input,
                error=error,
                terminal=True,
                statistics={
                    "step_type": self.get_type(),
                    "call_start_time": start,
                    "call_end_time": time(),
                },
            )
        except Exception as e:
            logging.error(f"Error in ResidueCheckPipelineStep: {e}")
            return PipelineStepOutput(
                step_type=self.get_type(),
                data={},
                input=input,
                error=e,
                terminal=True,
            )
