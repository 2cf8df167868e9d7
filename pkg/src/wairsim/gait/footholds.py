"""Foothold lattice and the velocity-lookahead selection heuristic."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import UnreachableFoothold
from .terrain import TerrainProfile


@dataclass(frozen=True)
class FootholdLattice:
    """Candidate anchors on the terrain: per-leg rows of world points.

    Each leg gets its own line of candidates at the leg's lateral offset,
    spaced uniformly in x, with z on the terrain surface.
    """

    points: tuple[np.ndarray, ...]  # one (N, 3) array per leg
    spacing: float

    @classmethod
    def build(
        cls,
        terrain: TerrainProfile,
        lateral_offsets: np.ndarray,
        x_start: float,
        x_end: float,
        spacing: float = 0.1,
    ) -> "FootholdLattice":
        if spacing <= 0.0 or x_end <= x_start:
            raise ValueError("need positive spacing and x_end > x_start")
        n = int(np.floor((x_end - x_start) / spacing)) + 1
        xs = x_start + spacing * np.arange(n)
        per_leg = []
        for y in lateral_offsets:
            pts = np.stack([xs, np.full(n, float(y)), [terrain.height(x) for x in xs]], axis=1)
            per_leg.append(pts)
        return cls(points=tuple(per_leg), spacing=spacing)


def select_foothold(
    lattice: FootholdLattice,
    leg: int,
    hip_world: np.ndarray,
    body_velocity: np.ndarray,
    stance_duration: float,
    heading: np.ndarray | None = None,
) -> tuple[int, np.ndarray]:
    """Pick the anchor nearest the hip ground-projection plus half-stance travel.

    The target is the hip's (x, y) plus ``v * T/2``; distance is measured in
    the ground plane. Ties break toward the heading, then lower index —
    deterministic for identical inputs.
    """
    heading = np.array([1.0, 0.0]) if heading is None else np.asarray(heading, dtype=float)[:2]
    target = hip_world[:2] + body_velocity[:2] * (stance_duration / 2.0)
    pts = lattice.points[leg]
    d = np.linalg.norm(pts[:, :2] - target, axis=1)
    best = np.min(d)
    tied = np.flatnonzero(d <= best + 1e-9)
    if len(tied) > 1:
        ahead = pts[tied, :2] @ heading
        tied = tied[np.argsort(-ahead, kind="stable")]
        tied = [int(tied[0])]
    idx = int(tied[0])
    return idx, pts[idx].copy()


def check_reachable(
    anchor: np.ndarray,
    hip_world: np.ndarray,
    length_limits: tuple[float, float],
    margin: float = 1e-3,
) -> None:
    dist = float(np.linalg.norm(anchor - hip_world))
    lo, hi = length_limits
    if not (lo + margin <= dist <= hi - margin):
        raise UnreachableFoothold(
            f"anchor at distance {dist:.3f} m outside leg range [{lo}, {hi}]"
        )
