"""Gait plan: anchors, swing curves, and stance-joint drive per phase.

The plan fixes everything the optimizer and the integrator need ahead of
time: which feet stand where during each phase, the swing curves delivering
feet to their next anchors, and the stance-joint acceleration feed-forward
``chi(t)`` — the second time derivative of leg inverse kinematics along the
body reference — that propels the torso through the pinned feet.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dynamics.contacts import ContactSet
from ..dynamics.kinematics import leg_ik
from ..dynamics.params import RobotParams
from ..errors import UnreachableFoothold
from ..spatial import euler_to_rotation
from .footholds import FootholdLattice, check_reachable, select_foothold
from .reference import ReferenceTrajectory
from .schedule import GaitSchedule
from .swing import SwingCurve, make_swing
from .terrain import TerrainProfile

_FD_STEP = 1e-3


@dataclass
class PhasePlan:
    index: int
    t_start: float
    t_end: float
    stance_legs: tuple[int, ...]
    swing_legs: tuple[int, ...]
    contacts: ContactSet
    swing_curves: dict[int, SwingCurve]
    chi_times: np.ndarray
    chi: np.ndarray  # (n_samples, 4, 3); only stance rows are meaningful


class GaitPlan:
    """Per-phase contact sets, swing curves and stance drive for one episode."""

    def __init__(
        self,
        terrain: TerrainProfile,
        schedule: GaitSchedule,
        reference: ReferenceTrajectory,
        params: RobotParams,
        lattice: FootholdLattice,
        clearance: float = 0.05,
        chi_samples: int = 21,
        reach_margin: float = 1e-3,
    ):
        self.terrain = terrain
        self.schedule = schedule
        self.reference = reference
        self.params = params
        self.lattice = lattice
        self.clearance = float(clearance)

        # Standing spots for legs that begin the episode in swing: nearest
        # lattice point to the hip at t0 with no lookahead.
        t0 = schedule.t0
        current = np.zeros((4, 3))
        for leg in range(4):
            hip = self._hip_world(t0, leg)
            _, current[leg] = select_foothold(lattice, leg, hip, np.zeros(3), 0.0)
        self.initial_anchors = current.copy()

        # Anchor selection for every stance phase (plus a virtual final one
        # so the last swing pair still has targets).
        anchors: list[np.ndarray] = []
        for k in range(schedule.num_phases + 1):
            t_k = t0 + k * schedule.phase_duration
            legs = (
                schedule.stance_legs(min(k, schedule.num_phases - 1))
                if k < schedule.num_phases
                else schedule.swing_legs(schedule.num_phases - 1)
            )
            row = np.full((4, 3), np.nan)
            vel, _ = reference.twist(min(t_k, t0 + reference.duration))
            for leg in legs:
                hip = self._hip_world(min(t_k, t0 + reference.duration), leg)
                _, row[leg] = select_foothold(
                    lattice, leg, hip, vel, schedule.phase_duration
                )
            anchors.append(row)

        self.phases: list[PhasePlan] = []
        for k in range(schedule.num_phases):
            t_a, t_b = schedule.phase_window(k)
            stance = schedule.stance_legs(k)
            swing = schedule.swing_legs(k)

            stance_flags = np.zeros(4, dtype=bool)
            cs_anchors = np.zeros((4, 3))
            normals = np.tile([0.0, 0.0, 1.0], (4, 1))
            friction = np.full(4, 1.0)
            for leg in stance:
                a = anchors[k][leg] if np.isfinite(anchors[k][leg, 0]) else current[leg]
                stance_flags[leg] = True
                cs_anchors[leg] = a
                normals[leg] = terrain.normal(a[0])
                friction[leg] = terrain.friction(a[0])
                self._validate_reach(k, leg, a, (t_a, t_b), reach_margin)
                current[leg] = a
            contacts = ContactSet(stance_flags, cs_anchors, normals, friction)

            curves: dict[int, SwingCurve] = {}
            for leg in swing:
                target_row = anchors[k + 1]
                target = (
                    target_row[leg]
                    if np.isfinite(target_row[leg, 0])
                    else current[leg]
                )
                lift = terrain.normal(current[leg][0]) + terrain.normal(target[0])
                curves[leg] = make_swing(
                    current[leg], target, self.clearance, lift, t_b - t_a
                )
                current[leg] = target

            chi_times = np.linspace(t_a, t_b, chi_samples)
            chi = np.zeros((chi_samples, 4, 3))
            for leg in stance:
                chi[:, leg, :] = self._stance_drive(chi_times, leg, cs_anchors[leg])

            self.phases.append(
                PhasePlan(
                    index=k,
                    t_start=t_a,
                    t_end=t_b,
                    stance_legs=stance,
                    swing_legs=swing,
                    contacts=contacts,
                    swing_curves=curves,
                    chi_times=chi_times,
                    chi=chi,
                )
            )

    def _hip_world(self, t: float, leg: int) -> np.ndarray:
        pos, eul = self.reference.pose(t)
        return pos + euler_to_rotation(eul) @ self.params.hip_offsets[leg]

    def _leg_ik_at(self, t: float, leg: int, anchor: np.ndarray) -> np.ndarray:
        pos, eul = self.reference.pose(t)
        return leg_ik(pos, euler_to_rotation(eul), self.params.hip_offsets[leg], anchor)

    def _stance_drive(self, times: np.ndarray, leg: int, anchor: np.ndarray) -> np.ndarray:
        """chi(t): second FD derivative of leg IK along the reference."""
        h = _FD_STEP
        # keep the stencil inside the reference domain — the pose table clamps
        # at its ends, which would turn the second difference into a 1/h spike
        lo = self.reference.t0 + h
        hi = self.reference.t0 + self.reference.duration - h
        out = np.zeros((len(times), 3))
        for j, t in enumerate(times):
            tc = min(max(t, lo), hi)
            q_m = self._leg_ik_at(tc - h, leg, anchor)
            q_0 = self._leg_ik_at(tc, leg, anchor)
            q_p = self._leg_ik_at(tc + h, leg, anchor)
            out[j] = (q_p - 2.0 * q_0 + q_m) / (h * h)
        return out

    def _validate_reach(
        self,
        k: int,
        leg: int,
        anchor: np.ndarray,
        window: tuple[float, float],
        margin: float,
    ) -> None:
        limits = (self.params.leg_length_min, self.params.leg_length_max)
        for t in np.linspace(window[0], window[1], 5):
            hip = self._hip_world(t, leg)
            try:
                check_reachable(anchor, hip, limits, margin)
            except UnreachableFoothold as exc:
                raise UnreachableFoothold(f"phase {k} leg {leg} at t={t:.3f}: {exc}") from exc

    def phase_at(self, t: float) -> PhasePlan:
        return self.phases[self.schedule.phase_index(t)]

    def stance_drive_at(self, phase: PhasePlan, t: float) -> np.ndarray:
        """Linear interpolation of the chi table at time t, (4, 3)."""
        times = phase.chi_times
        u = np.clip((t - times[0]) / (times[-1] - times[0]), 0.0, 1.0)
        x = u * (len(times) - 1)
        i = min(int(x), len(times) - 2)
        w = x - i
        return (1.0 - w) * phase.chi[i] + w * phase.chi[i + 1]
