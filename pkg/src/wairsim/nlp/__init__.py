"""Built-in augmented-Lagrangian NLP solver."""

from .auglag import SolverOptions, solve
from .check import GradientCheckReport, central_difference, check_gradients
from .problem import NlpProblem, SolveReport

__all__ = [
    "SolverOptions",
    "solve",
    "GradientCheckReport",
    "central_difference",
    "check_gradients",
    "NlpProblem",
    "SolveReport",
]
