from abc import abstractmethod, ABC
from typing import Dict, Any, List, Optional, Set

from pydantic import BaseModel, computed_field

from models import ModelHandle
from .model import LoopSpec, MonodromyVerdict, PipelineStepType


class PipelineStatisticsRead(BaseModel):
    """Timing of one step attempt; ``evaluations`` counts quartic solves or tracked samples."""

    step_type: PipelineStepType
    call_start_time: float
    call_end_time: float
    evaluations: int = 0

    @computed_field
    @property
    def elapsed(self) -> float:
        return self.call_end_time - self.call_start_time


class PipelineStepOutput:
    """
    What a verdict step hands to the next one. ``data`` is merged into the
    shared dict the pipeline passes along; ``error`` set means the step
    failed and the verdict stops there unless the error is retryable.
    """

    def __init__(
        self,
        step_type: PipelineStepType,
        data: Dict[str, Any],
        input: Dict[str, Any],
        terminal: bool = False,
        error: Optional[Exception] = None,
        **kwargs
    ):
        self.step_type = step_type
        self.data = data
        self.input = input
        self.terminal = terminal
        self.error = error
        self.statistics: Optional[Dict[str, Any]] = kwargs.get("statistics")

    @property
    def passed(self) -> bool:
        return self.error is None and bool(self.data)


# one check of the loop, run in order by a Pipeline
class PipelineStep(ABC):
    @abstractmethod
    def run(self, model: ModelHandle, loop: LoopSpec, data: Dict[str, Any]) -> PipelineStepOutput:
        pass

    @abstractmethod
    def get_name(self) -> str:
        pass

    @abstractmethod
    def get_type(self) -> PipelineStepType:
        pass


class PipelineResult:
    def __init__(
        self,
        verdict: Optional[MonodromyVerdict],
        steps: List[PipelineStepOutput],
        statistics: List[PipelineStatisticsRead],
        is_complete: bool = True,
        error: Optional[Exception] = None,
    ):
        self.verdict = verdict
        self.steps = steps
        self.statistics = statistics
        self.is_complete = is_complete
        self.error = error

    @staticmethod
    def data_by_type(steps: List[PipelineStepOutput]) -> Dict[PipelineStepType, Dict[str, Any]]:
        """Latest non-empty data per step type; retried attempts overwrite earlier ones."""
        return {step.step_type: step.data for step in steps if step.data}

    @staticmethod
    def failed_types(steps: List[PipelineStepOutput]) -> Set[PipelineStepType]:
        return {step.step_type for step in steps if step.error is not None}


class Pipeline(ABC):
    @abstractmethod
    def run(self, model: ModelHandle, loop: LoopSpec, data: Dict[str, Any]) -> PipelineResult:
        pass

    @abstractmethod
    def get_steps(self) -> List[PipelineStep]:
        pass


class PipelineStepOutputRead(BaseModel):
    step_type: str
    passed: bool
    data: Dict[str, Any]
    error: str

    def __init__(self, output: PipelineStepOutput):
        super().__init__(
            step_type=output.step_type.value,
            passed=output.passed,
            data=output.data,
            error=str(output.error or ""),
        )


class PipelineResultRead(BaseModel):
    verdict: Optional[MonodromyVerdict]
    steps: List[PipelineStepOutputRead]
    statistics: List[PipelineStatisticsRead]
    is_complete: bool
    error: str

    def __init__(self, result: PipelineResult):
        super().__init__(
            verdict=result.verdict,
            steps=[PipelineStepOutputRead(step) for step in result.steps],
            statistics=result.statistics,
            is_complete=result.is_complete,
            error=str(result.error or ""),
        )
