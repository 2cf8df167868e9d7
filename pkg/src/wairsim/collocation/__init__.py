"""Hermite-Simpson direct collocation for per-phase thrust optimization."""

from .cones import (
    cone_margin,
    cone_rows,
    cone_rows_exact,
    cone_rows_pyramid,
    friction_ratio,
    tangent_basis,
    tangential_split,
)
from .context import PhaseContext
from .interp import (
    collocation_defect,
    hermite_coefficients,
    interpolate_control,
    interpolate_state,
    interpolate_state_derivative,
    midpoint_slope,
    midpoint_state,
)
from .problem import (
    DecisionLayout,
    FusedEvaluator,
    NodeGrid,
    TranscribedPhase,
    TranscriptionOptions,
    dump_problem,
    load_problem,
    transcribe,
)

__all__ = [
    "cone_margin",
    "cone_rows",
    "cone_rows_exact",
    "cone_rows_pyramid",
    "friction_ratio",
    "tangent_basis",
    "tangential_split",
    "PhaseContext",
    "collocation_defect",
    "hermite_coefficients",
    "interpolate_control",
    "interpolate_state",
    "interpolate_state_derivative",
    "midpoint_slope",
    "midpoint_state",
    "DecisionLayout",
    "FusedEvaluator",
    "NodeGrid",
    "TranscribedPhase",
    "TranscriptionOptions",
    "dump_problem",
    "load_problem",
    "transcribe",
]
