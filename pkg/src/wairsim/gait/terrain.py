"""Piecewise-planar terrain along the walking direction.

The profile is a sequence of segments, each starting at an x station with a
constant slope angle (radians, positive = ascending in +x). Heights integrate
continuously from the first station, so the surface has no steps by
construction. The surface is extruded in y.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ScenarioError

_MAX_SLOPE = np.deg2rad(85.0)


@dataclass(frozen=True)
class TerrainSegment:
    start_x: float
    slope: float
    friction: float


class TerrainProfile:
    """Contiguous slope segments with per-segment friction."""

    def __init__(self, segments: list[TerrainSegment], base_height: float = 0.0):
        if not segments:
            raise ScenarioError("terrain needs at least one segment")
        xs = [s.start_x for s in segments]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ScenarioError("terrain segment stations must be strictly increasing")
        for s in segments:
            if abs(s.slope) > _MAX_SLOPE:
                raise ScenarioError(f"slope {s.slope} rad too steep")
            if s.friction <= 0.0:
                raise ScenarioError("friction must be positive")
        self.segments = list(segments)
        # Cumulative height at each station.
        self._station_x = np.array(xs)
        heights = [base_height]
        for a, b, seg in zip(xs, xs[1:], segments):
            heights.append(heights[-1] + np.tan(seg.slope) * (b - a))
        self._station_z = np.array(heights)

    @classmethod
    def from_config(cls, spec: list[dict]) -> "TerrainProfile":
        segs = [
            TerrainSegment(
                start_x=float(d["start_x"]),
                slope=float(d["slope"]),
                friction=float(d.get("friction", 0.35)),
            )
            for d in spec
        ]
        return cls(segs)

    def to_config(self) -> list[dict]:
        return [
            {"start_x": s.start_x, "slope": s.slope, "friction": s.friction}
            for s in self.segments
        ]

    def segment_index(self, x: float) -> int:
        """Segment owning station x; boundary segments extend outward."""
        return int(np.clip(np.searchsorted(self._station_x, x, side="right") - 1, 0, len(self.segments) - 1))

    def slope(self, x: float) -> float:
        return self.segments[self.segment_index(x)].slope

    def friction(self, x: float) -> float:
        return self.segments[self.segment_index(x)].friction

    def height(self, x: float) -> float:
        i = self.segment_index(x)
        return float(self._station_z[i] + np.tan(self.segments[i].slope) * (x - self._station_x[i]))

    def surface_point(self, x: float, y: float = 0.0) -> np.ndarray:
        return np.array([x, y, self.height(x)])

    def normal(self, x: float) -> np.ndarray:
        a = self.slope(x)
        return np.array([-np.sin(a), 0.0, np.cos(a)])

    def tangent(self, x: float) -> np.ndarray:
        a = self.slope(x)
        return np.array([np.cos(a), 0.0, np.sin(a)])

    @property
    def junctions(self) -> np.ndarray:
        """x stations where the slope changes (interior boundaries)."""
        return self._station_x[1:]

    def arc_length(self, x: float) -> float:
        """Surface arc length from the first station to x (along the path)."""
        s = 0.0
        for i, seg in enumerate(self.segments):
            a = self._station_x[i]
            b = self._station_x[i + 1] if i + 1 < len(self.segments) else np.inf
            if x <= a and i > 0:
                break
            hi = min(x, b)
            lo = min(a, x) if i == 0 else a
            s += max(0.0, hi - lo) / np.cos(seg.slope)
        if x < self._station_x[0]:
            s = (x - self._station_x[0]) / np.cos(self.segments[0].slope)
        return float(s)

    def x_at_arc_length(self, s: float) -> float:
        """Inverse of arc_length (piecewise linear, exact)."""
        acc = 0.0
        for i, seg in enumerate(self.segments):
            a = self._station_x[i]
            b = self._station_x[i + 1] if i + 1 < len(self.segments) else np.inf
            seg_len = (b - a) / np.cos(seg.slope)
            if s <= acc + seg_len or i == len(self.segments) - 1:
                return float(a + (s - acc) * np.cos(seg.slope))
            acc += seg_len
        raise AssertionError("unreachable")
