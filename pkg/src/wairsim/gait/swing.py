"""Swing-foot trajectories: quintic Bezier with zero endpoint velocity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Lift factor putting the curve apex exactly `clearance` above the chord
# midpoint when the lift direction is normal to the chord (see make_swing).
_LIFT_GAIN = 1.6


def de_casteljau(points: np.ndarray, s: float) -> np.ndarray:
    """Evaluate a Bezier curve with the given control polygon at s in [0, 1]."""
    pts = np.array(points, dtype=float)
    while len(pts) > 1:
        pts = (1.0 - s) * pts[:-1] + s * pts[1:]
    return pts[0]


@dataclass(frozen=True)
class SwingCurve:
    """One swing trajectory (world frame), parameterized over [0, 1]."""

    control_points: np.ndarray
    duration: float

    def position(self, s: float) -> np.ndarray:
        return de_casteljau(self.control_points, float(np.clip(s, 0.0, 1.0)))

    def velocity(self, s: float) -> np.ndarray:
        """World velocity at parameter s, scaled by the swing duration."""
        s = float(np.clip(s, 0.0, 1.0))
        diff = 5.0 * np.diff(self.control_points, axis=0)
        return de_casteljau(diff, s) / self.duration

    @property
    def start(self) -> np.ndarray:
        return self.control_points[0]

    @property
    def end(self) -> np.ndarray:
        return self.control_points[-1]


def make_swing(
    start: np.ndarray,
    end: np.ndarray,
    clearance: float,
    lift_dir: np.ndarray,
    duration: float,
) -> SwingCurve:
    """Quintic Bezier from start to end with ground clearance.

    The first and last control points are doubled (zero velocity at lift-off
    and touchdown); the two interior points sit at chord thirds, lifted
    1.6*clearance along ``lift_dir``, which puts the apex exactly
    ``clearance`` above the chord midpoint for a chord-normal lift.
    """
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    n = np.asarray(lift_dir, dtype=float)
    n = n / np.linalg.norm(n)
    d = end - start
    lift = _LIFT_GAIN * clearance * n
    points = np.stack(
        [
            start,
            start,
            start + d / 3.0 + lift,
            start + 2.0 * d / 3.0 + lift,
            end,
            end,
        ]
    )
    return SwingCurve(control_points=points, duration=float(duration))
