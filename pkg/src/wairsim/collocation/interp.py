"""Hermite-Simpson interpolants and defect construction.

States interpolate cubically within an interval using endpoint values and
dynamics; controls interpolate linearly. With the normalized coordinate
s = (t - t_j)/h the cubic is

    x(s) = c0 + c1 s + c2 s^2 + c3 s^3
    c0 = x_j                   c1 = h f_j
    c2 = -3 x_j - 2 h f_j + 3 x_{j+1} - h f_{j+1}
    c3 =  2 x_j +   h f_j - 2 x_{j+1} + h f_{j+1}

which matches value and slope at both endpoints. The Simpson defect compares
the interpolant's midpoint slope with the dynamics at the interpolated
midpoint state and averaged control; for exact endpoint data it is O(h^4).
"""

from __future__ import annotations

import numpy as np


def interpolate_control(u0: np.ndarray, u1: np.ndarray, s: float) -> np.ndarray:
    """Linear control interpolation at s in [0, 1]."""
    return (1.0 - s) * np.asarray(u0) + s * np.asarray(u1)


def hermite_coefficients(
    x0: np.ndarray, f0: np.ndarray, x1: np.ndarray, f1: np.ndarray, h: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    x0, f0, x1, f1 = (np.asarray(a, dtype=float) for a in (x0, f0, x1, f1))
    c0 = x0
    c1 = h * f0
    c2 = -3.0 * x0 - 2.0 * h * f0 + 3.0 * x1 - h * f1
    c3 = 2.0 * x0 + h * f0 - 2.0 * x1 + h * f1
    return c0, c1, c2, c3


def interpolate_state(
    x0: np.ndarray, f0: np.ndarray, x1: np.ndarray, f1: np.ndarray, h: float, s: float
) -> np.ndarray:
    """Cubic Hermite state at s in [0, 1] within an interval of length h."""
    c0, c1, c2, c3 = hermite_coefficients(x0, f0, x1, f1, h)
    return c0 + s * (c1 + s * (c2 + s * c3))


def interpolate_state_derivative(
    x0: np.ndarray, f0: np.ndarray, x1: np.ndarray, f1: np.ndarray, h: float, s: float
) -> np.ndarray:
    """Time derivative of the cubic Hermite state at s in [0, 1]."""
    _, c1, c2, c3 = hermite_coefficients(x0, f0, x1, f1, h)
    return (c1 + s * (2.0 * c2 + 3.0 * s * c3)) / h


def midpoint_state(x0, f0, x1, f1, h) -> np.ndarray:
    """Closed form of interpolate_state at s = 1/2."""
    x0, f0, x1, f1 = (np.asarray(a, dtype=float) for a in (x0, f0, x1, f1))
    return 0.5 * (x0 + x1) + (h / 8.0) * (f0 - f1)


def midpoint_slope(x0, f0, x1, f1, h) -> np.ndarray:
    """Closed form of interpolate_state_derivative at s = 1/2."""
    x0, f0, x1, f1 = (np.asarray(a, dtype=float) for a in (x0, f0, x1, f1))
    return (1.5 / h) * (x1 - x0) - 0.25 * (f0 + f1)


def collocation_defect(x0, f0, x1, f1, h, f_mid) -> np.ndarray:
    """Simpson defect: interpolant midpoint slope minus midpoint dynamics."""
    return midpoint_slope(x0, f0, x1, f1, h) - np.asarray(f_mid, dtype=float)
