"""Friction-cone admissibility rows for contact forces.

Both forms return arrays where feasibility means every entry >= 0. The exact
form uses the Euclidean tangential norm (smoothed near zero so gradients stay
finite, erring on the conservative side); the pyramid form is the standard
four-sided inner linearization, so pyramid-feasible forces are always
exact-cone feasible.
"""

from __future__ import annotations

import numpy as np

# Tangential-norm smoothing width in newtons. sqrt(|f_t|^2 + w^2) >= |f_t|,
# so the smoothed row is strictly conservative; the width is chosen large
# enough that the row stays visibly smooth to finite-difference gradients
# (a near-zero width turns the f_t = 0 crease into a kink the line search
# cannot cross), while costing well under a millinewton of margin at working
# loads.
SMOOTHING_WIDTH = 0.05


def tangential_split(force: np.ndarray, normal: np.ndarray) -> tuple[float, np.ndarray]:
    """(normal component, tangential vector) of a world-frame contact force."""
    force = np.asarray(force, dtype=float)
    normal = np.asarray(normal, dtype=float)
    fn = float(force @ normal)
    return fn, force - fn * normal


def tangent_basis(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic orthonormal basis of the contact tangent plane."""
    n = np.asarray(normal, dtype=float)
    seed = np.array([1.0, 0.0, 0.0])
    if abs(n @ seed) > 0.9:
        seed = np.array([0.0, 1.0, 0.0])
    e1 = seed - (seed @ n) * n
    e1 = e1 / np.linalg.norm(e1)
    return e1, np.cross(n, e1)

def cone_rows_exact(
    force, normal, mu: float, n_min: float, smoothing: float = SMOOTHING_WIDTH
) -> np.ndarray:
    """[f_n - n_min, mu f_n - |f_t|]; feasible iff both >= 0."""
    fn, ft = tangential_split(force, normal)
    ft_mag = np.sqrt(ft @ ft + smoothing**2)
    return np.array([fn - n_min, mu * fn - ft_mag])


def cone_rows_pyramid(force, normal, mu: float, n_min: float) -> np.ndarray:
    """Inner four-sided pyramid: per-axis tangential bounds mu/sqrt(2) f_n."""
    fn, ft = tangential_split(force, normal)
    e1, e2 = tangent_basis(normal)
    t1, t2 = float(ft @ e1), float(ft @ e2)
    k = mu / np.sqrt(2.0)
    return np.array([fn - n_min, k * fn - t1, k * fn + t1, k * fn - t2, k * fn + t2])


def cone_rows(force, normal, mu: float, n_min: float, form: str = "exact") -> np.ndarray:
    if form == "exact":
        return cone_rows_exact(force, normal, mu, n_min)
    if form == "pyramid":
        return cone_rows_pyramid(force, normal, mu, n_min)
    raise ValueError(f"unknown cone form {form!r}")


def cone_margin(force, normal, mu: float, n_min: float) -> float:
    """Worst-case exact-cone margin (>= 0 means admissible), unsmoothed."""
    return float(np.min(cone_rows_exact(force, normal, mu, n_min, smoothing=0.0)))


def friction_ratio(force, normal) -> float:
    """|f_t| / f_n; inf for nonpositive normal force."""
    fn, ft = tangential_split(force, normal)
    if fn <= 0.0:
        return np.inf
    return float(np.linalg.norm(ft) / fn)
