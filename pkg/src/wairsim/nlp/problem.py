"""Problem container and solve report for the built-in NLP solver."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass
class NlpProblem:
    """Smooth NLP: minimize f(y) s.t. c_eq(y) = 0, g_ineq(y) >= 0, lb <= y <= ub.

    ``fused`` optionally provides backend-accelerated merit evaluation with
    the signature of FusedEvaluator; when absent the solver composes the
    callables directly.
    """

    objective: Callable[[np.ndarray], float]
    x0: np.ndarray
    eq_constraints: Callable[[np.ndarray], np.ndarray] | None = None
    ineq_constraints: Callable[[np.ndarray], np.ndarray] | None = None
    bounds: np.ndarray | None = None  # (n, 2) [lb, ub], +-inf allowed
    gradient: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = "nlp"
    fused: object | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.x0 = np.asarray(self.x0, dtype=float)
        if self.bounds is not None:
            self.bounds = np.asarray(self.bounds, dtype=float)
            if self.bounds.shape != (self.x0.size, 2):
                raise ValueError("bounds must be (n, 2)")

    def eq(self, y: np.ndarray) -> np.ndarray:
        if self.eq_constraints is None:
            return np.zeros(0)
        return np.atleast_1d(np.asarray(self.eq_constraints(y), dtype=float))

    def ineq(self, y: np.ndarray) -> np.ndarray:
        if self.ineq_constraints is None:
            return np.zeros(0)
        return np.atleast_1d(np.asarray(self.ineq_constraints(y), dtype=float))

    def max_violation(self, y: np.ndarray) -> float:
        v = 0.0
        c = self.eq(y)
        if c.size:
            v = float(np.max(np.abs(c)))
        g = self.ineq(y)
        if g.size:
            v = max(v, float(max(0.0, -np.min(g))))
        return v


@dataclass
class SolveReport:
    """Outcome of one solve. ``status`` is 'converged', 'max_outer', or 'failed'."""

    status: str
    x: np.ndarray
    objective: float
    max_violation: float
    kkt_residual: float
    outer_iterations: int
    inner_iterations: int
    n_evaluations: int
    multipliers_eq: np.ndarray
    multipliers_ineq: np.ndarray
    wall_time: float
    message: str = ""

    @property
    def converged(self) -> bool:
        return self.status == "converged"
