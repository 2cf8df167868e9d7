"""Finite-difference gradient verification."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass
class GradientCheckReport:
    max_abs_error: float
    max_rel_error: float
    bad_indices: list[int] = field(default_factory=list)
    richardson_ratio: float | None = None

    @property
    def ok(self) -> bool:
        return not self.bad_indices


def central_difference(
    fn: Callable[[np.ndarray], float], x: np.ndarray, step: float = 1e-6
) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for i in range(x.size):
        h = step * max(1.0, abs(x[i]))
        xp = x.copy()
        xp[i] += h
        xm = x.copy()
        xm[i] -= h
        grad[i] = (fn(xp) - fn(xm)) / (2.0 * h)
    return grad


def check_gradients(
    fn: Callable[[np.ndarray], float],
    x: np.ndarray,
    grad_fn: Callable[[np.ndarray], np.ndarray] | None = None,
    step: float = 1e-6,
    rel_tol: float = 1e-5,
) -> GradientCheckReport:
    """Verify a gradient against central differences.

    With ``grad_fn`` given, compares the analytic gradient componentwise and
    flags entries whose relative error exceeds ``rel_tol``. Without it, the
    finite-difference scheme checks itself: central differences at steps h
    and h/2 against the Richardson extrapolation; the error ratio should be
    close to 4 for a correctly behaving O(h^2) scheme.
    """
    x = np.asarray(x, dtype=float)
    d_h = central_difference(fn, x, step)
    if grad_fn is not None:
        g = np.asarray(grad_fn(x), dtype=float)
        abs_err = np.abs(g - d_h)
        scale = np.maximum(np.abs(d_h), 1.0)
        rel_err = abs_err / scale
        bad = [int(i) for i in np.flatnonzero(rel_err > rel_tol)]
        return GradientCheckReport(
            max_abs_error=float(np.max(abs_err)) if abs_err.size else 0.0,
            max_rel_error=float(np.max(rel_err)) if rel_err.size else 0.0,
            bad_indices=bad,
        )

    d_h2 = central_difference(fn, x, step / 2.0)
    richer = (4.0 * d_h2 - d_h) / 3.0
    err_h = np.abs(d_h - richer)
    err_h2 = np.abs(d_h2 - richer)
    mask = err_h2 > 1e-14
    ratio = float(np.median(err_h[mask] / err_h2[mask])) if np.any(mask) else 4.0
    return GradientCheckReport(
        max_abs_error=float(np.max(err_h)) if err_h.size else 0.0,
        max_rel_error=float(np.max(err_h / np.maximum(np.abs(richer), 1.0))),
        richardson_ratio=ratio,
    )
