from .residue import numeric_residue, residue_at_infinity, variation_of_integral
from .bifurcation import BifurcationCandidate, BifurcationScan, bifurcation_scan, classify_point, discriminant_scan
from .model import LoopSpec, MonodromyChecks, MonodromyMatrix, MonodromyVerdict, PipelineStepType
from .pipeline import PipelineResult, PipelineResultRead, PipelineStepOutput
from .monodromy_pipeline import (
    MonodromyPipeline,
    build_verdict,
    loop_coefficient_path,
    monodromy_matrix,
    monodromy_pipeline,
    monodromy_verdict,
)
