import copy
import logging
from typing import Any, Dict, List, Optional, Tuple

from models import ModelHandle
from pipeline_steps.custom_exception import RetryablePipelineStepException, UnexpectedPermutation
from pipeline_steps.genericity_check import GenericityCheckPipelineStep
from pipeline_steps.residue_check import ResidueCheckPipelineStep
from pipeline_steps.root_exchange import RootExchangePipelineStep
from .model import (
    LoopSpec,
    MonodromyChecks,
    MonodromyMatrix,
    MonodromyVerdict,
    PipelineStepType,
)
from .pipeline import (
    Pipeline,
    PipelineResult,
    PipelineStatisticsRead,
    PipelineStep,
    PipelineStepOutput,
)


class MonodromyPipeline(Pipeline):
    """
    Steps involved in the monodromy pipeline:
    1. GenericityCheckPipelineStep
    2. RootExchangePipelineStep
    3. ResidueCheckPipelineStep

    All the steps are executed in the same order and the verdict is built
    from whatever the steps produced, including the failing one.
    """

    def get_steps(self) -> List[PipelineStep]:
        return self.pipeline_steps

    def __init__(self, pipeline_steps: List[PipelineStep]):
        super().__init__()
        self.name = "MonodromyPipeline"
        self.pipeline_steps = pipeline_steps

    def run(
        self,
        model: ModelHandle,
        loop: LoopSpec,
        data: Optional[Dict[str, Any]] = None,
    ) -> PipelineResult:
        data = {} if data is None else data
        results: List[PipelineStepOutput] = []
        statistics: List[PipelineStatisticsRead] = []
        step_type = PipelineStepType.GENERICITY_CHECK
        try:
            for step in self.pipeline_steps:
                step_type = step.get_type()
                result = step.run(model, loop, data)
                if result.statistics:
                    statistics.append(PipelineStatisticsRead.model_validate(result.statistics))

                if isinstance(result.error, RetryablePipelineStepException):
                    iterator = 0
                    max_retries = result.error.retry_count
                    while iterator < max_retries:
                        iterator += 1
                        logging.info(f"{step.get_name()}: retry {iterator}/{max_retries}")
                        result = step.run(model, loop, data)
                        if result.statistics:
                            statistics.append(PipelineStatisticsRead.model_validate(result.statistics))
                        if not result.error or not isinstance(result.error, RetryablePipelineStepException):
                            break

                results.append(result)

                if result.error:
                    return PipelineResult(
                        verdict=build_verdict(model, loop, results, result.error),
                        steps=results,
                        is_complete=True,
                        error=result.error,
                        statistics=statistics,
                    )

                data.update(copy.deepcopy(result.data))

                if result.terminal:
                    break

            return PipelineResult(
                verdict=build_verdict(model, loop, results, None),
                steps=results,
                is_complete=True,
                error=None,
                statistics=statistics,
            )
        except Exception as error:
            logging.error(f"Error in MonodromyPipeline at {step_type.value}: {error}")
            results.append(
                PipelineStepOutput(
                    step_type=step_type,
                    data=data,
                    input=data,
                    error=error,
                    terminal=True,
                )
            )
            return PipelineResult(
                verdict=build_verdict(model, loop, results, error),
                steps=results,
                is_complete=False,
                error=error,
                statistics=statistics,
            )

    def get_name(self) -> str:
        return self.name


def _matrix_for(permutation_class: Optional[str]) -> Optional[MonodromyMatrix]:
    if permutation_class == "double_transposition":
        return MonodromyMatrix.focus_focus()
    if permutation_class == "identity":
        return MonodromyMatrix.identity()
    return None


def build_verdict(
    model: ModelHandle,
    loop: LoopSpec,
    steps: List[PipelineStepOutput],
    error: Optional[Exception],
) -> MonodromyVerdict:
    produced: Dict[PipelineStepType, Dict[str, Any]] = PipelineResult.data_by_type(steps)
    generic = produced.get(PipelineStepType.GENERICITY_CHECK, {})
    exchange = produced.get(PipelineStepType.ROOT_EXCHANGE, {})
    residue = produced.get(PipelineStepType.RESIDUE_CHECK, {})

    failed = PipelineResult.failed_types(steps)
    checks = MonodromyChecks(
        genericity=bool(generic) and PipelineStepType.GENERICITY_CHECK not in failed,
        permutation=bool(exchange) and PipelineStepType.ROOT_EXCHANGE not in failed,
        residue=bool(residue) and PipelineStepType.RESIDUE_CHECK not in failed,
    )
    matrix = _matrix_for(exchange.get("permutation_class")) if error is None else None
    h0, k0 = loop.center
    return MonodromyVerdict(
        model=model.get_name(),
        loop={"h0": h0, "k0": k0, "radius": loop.radius, "n_samples": exchange.get("n_samples", loop.n_samples)},
        matrix=matrix.as_lists() if matrix else None,
        permutation=exchange.get("permutation"),
        permutation_class=exchange.get("permutation_class"),
        residue=residue.get("residue"),
        det_D=generic.get("det_D"),
        orientation=generic.get("orientation"),
        checks=checks,
        status="ok" if error is None else type(error).__name__,
        error=None if error is None else str(error),
    )


monodromy_pipeline = MonodromyPipeline(
    pipeline_steps=[
        GenericityCheckPipelineStep(),
        RootExchangePipelineStep(),
        ResidueCheckPipelineStep(),
    ]
)


def loop_coefficient_path(m: ModelHandle, loop: LoopSpec, direction: int = 1):
    return loop.coefficient_path(m, direction)


def monodromy_verdict(
    m: ModelHandle,
    loop: LoopSpec,
    guard: float = 3.0,
) -> Tuple[MonodromyVerdict, PipelineResult]:
    pipeline = monodromy_pipeline
    if guard != 3.0:
        pipeline = MonodromyPipeline(
            pipeline_steps=[
                GenericityCheckPipelineStep(),
                RootExchangePipelineStep(guard=guard),
                ResidueCheckPipelineStep(),
            ]
        )
    result = pipeline.run(m, loop, {})
    return result.verdict, result


def monodromy_matrix(m: ModelHandle, loop: LoopSpec, guard: float = 3.0) -> MonodromyMatrix:
    """
    Monodromy of the torus fibration around ``loop`` in the basis
    (γ_K, γ_H). Raises the failing step's exception when any check fails.
    """
    verdict, result = monodromy_verdict(m, loop, guard)
    if result.error is not None:
        raise result.error
    matrix = _matrix_for(verdict.permutation_class)
    if matrix is None:
        raise UnexpectedPermutation(f"no matrix for permutation {verdict.permutation}")
    return matrix
