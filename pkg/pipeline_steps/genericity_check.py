import logging
from time import time
from typing import Dict, Any

from models import ModelHandle
from monodromy.model import LoopSpec, PipelineStepType
from monodromy.pipeline import PipelineStep, PipelineStepOutput
from normalform import genericity_check


class GenericityCheckPipelineStep(PipelineStep):
    """
    Computes the Jacobian of the normal-form map at the critical value and
    records its orientation for the root exchange step.
    """

    def get_type(self) -> PipelineStepType:
        return PipelineStepType.GENERICITY_CHECK

    def get_name(self) -> str:
        return self.name

    def __init__(self, step: float = None):
        super().__init__()
        self.name = "GenericityCheckPipelineStep"
        self.step = step

    def run(
        self,
        model: ModelHandle,
        loop: LoopSpec,
        data: Dict[str, Any],
    ) -> PipelineStepOutput:
        input = {"model": model.get_name(), "critical_value": list(model.critical_value())}
        start = time()
        try:
            report = genericity_check(model, self.step)
            return PipelineStepOutput(
                step_type=self.get_type(),
                data={
                    "genericity": report.model_dump(by_alias=True),
                    "det_D": report.det,
                    "orientation": report.orientation,
                },
                input=input,
                terminal=False,
                statistics={
                    "step_type": self.get_type(),
                    "call_start_time": start,
                    "call_end_time": time(),
                    "evaluations": 4,
                },
            )
        except Exception as e:
            logging.error(f"Error in GenericityCheckPipelineStep: {e}")
            return PipelineStepOutput(
                step_type=self.get_type(),
                data={},
                input=input,
                error=e,
                terminal=True,
            )
