"""Slope-parallel body reference trajectory.

The torso reference advances along the terrain surface at constant arc-length
speed, offset ``body_height`` along the local surface normal, with pitch
matching the slope. Note the sign: with z-up and the standard right-handed
pitch axis (+y), nose-up pitch is negative, so an ascending slope of angle
``a`` gives a pitch reference of ``-a``.

At slope junctions the pitch (hence tangent and normal) is blended with a
quintic smoothstep over a fixed time window, and the COM path is rebuilt by
integrating the blended tangent on a fixed 1 kHz grid, so position, velocity
and pitch stay C1 through the transition. Evaluation between grid samples is
cubic Hermite, making the table deterministic and free of adaptive stepping.
"""

from __future__ import annotations

import numpy as np

from ..errors import ScenarioError
from .terrain import TerrainProfile

_TABLE_DT = 1e-3


def _smoothstep(u: np.ndarray) -> np.ndarray:
    u = np.clip(u, 0.0, 1.0)
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u))


def _smoothstep_d(u: np.ndarray) -> np.ndarray:
    inside = (u > 0.0) & (u < 1.0)
    u = np.clip(u, 0.0, 1.0)
    return np.where(inside, 30.0 * u * u * (1.0 - u) ** 2, 0.0)


class ReferenceTrajectory:
    """Body pose/twist reference over a time horizon."""

    def __init__(
        self,
        terrain: TerrainProfile,
        start_x: float,
        speed: float,
        body_height: float,
        duration: float,
        blend_time: float = 0.3,
        t0: float = 0.0,
    ):
        if speed < 0.0:
            raise ScenarioError("reference speed must be >= 0")
        if body_height <= 0.0:
            raise ScenarioError("body_height must be positive")
        self.terrain = terrain
        self.speed = float(speed)
        self.body_height = float(body_height)
        self.t0 = float(t0)
        self.duration = float(duration)
        self.blend_time = float(blend_time)

        n = int(round(duration / _TABLE_DT)) + 1
        self._t = t0 + _TABLE_DT * np.arange(n)

        # Junction crossing times (arc-length parameterization is exact).
        s0 = terrain.arc_length(start_x)
        s = s0 + self.speed * (self._t - t0)
        if speed > 0.0:
            crossing = [(terrain.arc_length(xj) - s0) / speed + t0 for xj in terrain.junctions]
        else:
            crossing = []
        crossing = [tc for tc in crossing if t0 < tc < t0 + duration]
        if any(b - a < blend_time for a, b in zip(crossing, crossing[1:])):
            raise ScenarioError("junction blend windows overlap; lower blend_time")

        # Blended slope angle over the table.
        x_of_s = np.array([terrain.x_at_arc_length(si) for si in s])
        alpha = np.array([terrain.slope(xi) for xi in x_of_s])
        alpha_rate = np.zeros_like(alpha)
        for tc in crossing:
            xj = terrain.x_at_arc_length(s0 + self.speed * (tc - t0))
            a_lo = terrain.slope(xj - 1e-9)
            a_hi = terrain.slope(xj + 1e-9)
            u = (self._t - (tc - blend_time / 2.0)) / blend_time
            w = _smoothstep(u)
            inside = (u > 0.0) & (u < 1.0)
            alpha = np.where(inside, a_lo + (a_hi - a_lo) * w, alpha)
            alpha_rate += (a_hi - a_lo) * _smoothstep_d(u) / blend_time

        self._pitch = -alpha
        self._pitch_rate = -alpha_rate

        # Rebuild the COM path from the blended tangent/normal so velocity is
        # the exact derivative of the stored positions (up to quadrature).
        ca, sa = np.cos(alpha), np.sin(alpha)
        tangent = np.stack([ca, np.zeros_like(ca), sa], axis=1)
        normal = np.stack([-sa, np.zeros_like(sa), ca], axis=1)
        dnormal_dt = alpha_rate[:, None] * np.stack([-ca, np.zeros_like(ca), -sa], axis=1)
        self._vel = self.speed * tangent + body_height * dnormal_dt

        p0 = terrain.surface_point(start_x) + body_height * terrain.normal(start_x)
        disp = np.zeros_like(self._vel)
        disp[1:] = np.cumsum(0.5 * _TABLE_DT * (self._vel[1:] + self._vel[:-1]), axis=0)
        self._pos = p0 + disp

    def _locate(self, t: float) -> tuple[int, float]:
        tau = np.clip(t - self.t0, 0.0, self.duration)
        i = min(int(tau / _TABLE_DT), len(self._t) - 2)
        return i, (tau - i * _TABLE_DT) / _TABLE_DT

    def pose(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """(position, euler) at time t; euler = (yaw, pitch, roll)."""
        i, u = self._locate(t)
        h00 = (1 + 2 * u) * (1 - u) ** 2
        h10 = u * (1 - u) ** 2
        h01 = u * u * (3 - 2 * u)
        h11 = u * u * (u - 1)
        pos = (
            h00 * self._pos[i]
            + h10 * _TABLE_DT * self._vel[i]
            + h01 * self._pos[i + 1]
            + h11 * _TABLE_DT * self._vel[i + 1]
        )
        pitch = (
            h00 * self._pitch[i]
            + h10 * _TABLE_DT * self._pitch_rate[i]
            + h01 * self._pitch[i + 1]
            + h11 * _TABLE_DT * self._pitch_rate[i + 1]
        )
        return pos, np.array([0.0, pitch, 0.0])

    def twist(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """(velocity, euler_rates) at time t (linear between table samples)."""
        i, u = self._locate(t)
        vel = (1 - u) * self._vel[i] + u * self._vel[i + 1]
        pitch_rate = (1 - u) * self._pitch_rate[i] + u * self._pitch_rate[i + 1]
        return vel, np.array([0.0, pitch_rate, 0.0])

    def body_state(self, t: float) -> np.ndarray:
        """Packed 12-dim body state [p, euler, v, euler_rates]."""
        pos, eul = self.pose(t)
        vel, erate = self.twist(t)
        return np.concatenate([pos, eul, vel, erate])
