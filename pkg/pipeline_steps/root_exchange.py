import logging
from time import time
from typing import Dict, Any

from cpoly import classify_permutation, loop_permutation, track_roots
from models import ModelHandle
from monodromy.model import LoopSpec, PipelineStepType
from monodromy.pipeline import PipelineStep, PipelineStepOutput
from pipeline_steps.custom_exception import RefinementExhausted, UnexpectedPermutation


class RootExchangePipelineStep(PipelineStep):
    """
    Tracks the roots of the spectral quartic once around the loop and reads
    off the permutation they undergo.

    The loop is walked against its own orientation when the normal-form
    Jacobian reverses orientation, so the exchange is always measured on a
    counterclockwise loop in the normal-form plane. A RefinementExhausted
    failure doubles ``n_samples`` in the shared data before the retry.
    """

    def get_type(self) -> PipelineStepType:
        return PipelineStepType.ROOT_EXCHANGE

    def get_name(self) -> str:
        return self.name

    def __init__(self, guard: float = 3.0):
        super().__init__()
        self.name = "RootExchangePipelineStep"
        self.guard = guard

    def run(
        self,
        model: ModelHandle,
        loop: LoopSpec,
        data: Dict[str, Any],
    ) -> PipelineStepOutput:
        direction = data.get("orientation", 1)
        n_samples = data.get("n_samples", loop.n_samples)
        input = {"n_samples": n_samples, "direction": direction, "guard": self.guard}
        start = time()
        try:
            track = track_roots(loop.coefficient_path(model, direction), n_samples, self.guard)
            perm = loop_permutation(track)
            kind = classify_permutation(perm, track.rootsets[0])
            logging.info(f"{model.get_name()}: loop permutation {perm.cycle_notation()} ({kind})")
            result = {
                "permutation": perm.cycle_notation(),
                "permutation_class": kind,
                "n_samples": n_samples,
                "track_points": len(track),
            }
            error = None
            if kind == "other":
                error = UnexpectedPermutation(
                    f"roots permuted as {perm.cycle_notation()}, neither identity nor a conjugate-pair exchange"
                )
            return PipelineStepOutput(
                step_type=self.get_type(),
                data=result,
                input=input,
                error=error,
                terminal=error is not None,
                statistics={
                    "step_type": self.get_type(),
                    "call_start_time": start,
                    "call_end_time": time(),
                    "evaluations": len(track),
                },
            )
        except RefinementExhausted as e:
            logging.error(f"Error in RootExchangePipelineStep with {n_samples} samples: {e}")
            data["n_samples"] = 2 * n_samples
            return PipelineStepOutput(
                step_type=self.get_type(),
                data={},
                input=input,
                error=e,
                terminal=True,
            )
        except Exception as e:
            logging.error(f"Error in RootExchangePipelineStep: {e}")
            return PipelineStepOutput(
                step_type=self.get_type(),
                data={},
                input=input,
                error=e,
                terminal=True,
            )
