"""Robot parameter set for the reduced-order torso-plus-massless-legs model."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import yaml

from ..errors import ScenarioError

LEG_NAMES = ("FR", "HR", "FL", "HL")
# Diagonal trot pairs: pair 0 = {FR, HL}, pair 1 = {HR, FL}.
DIAGONAL_PAIRS = ((0, 3), (1, 2))


def _default_hips() -> np.ndarray:
    # Rows follow LEG_NAMES; x forward, y left, z up (body frame).
    return np.array(
        [
            [0.22, -0.11, -0.05],
            [-0.22, -0.11, -0.05],
            [0.22, 0.11, -0.05],
            [-0.22, 0.11, -0.05],
        ]
    )


def _default_thrusters() -> np.ndarray:
    return np.array(
        [
            [0.15, -0.10, 0.05],
            [-0.15, -0.10, 0.05],
            [0.15, 0.10, 0.05],
            [-0.15, 0.10, 0.05],
        ]
    )


@dataclass
class RobotParams:
    """Masses, inertias and mount geometry. SI units throughout.

    Legs are massless: only the torso carries inertia. ``inertia`` is the
    torso tensor in the body frame; ``hip_offsets``/``thruster_offsets`` are
    body-frame mount points, one row per leg in LEG_NAMES order.
    """

    mass: float = 11.5
    inertia: np.ndarray = field(default_factory=lambda: np.diag([0.25, 0.35, 0.30]))
    hip_offsets: np.ndarray = field(default_factory=_default_hips)
    thruster_offsets: np.ndarray = field(default_factory=_default_thrusters)
    leg_length_min: float = 0.15
    leg_length_max: float = 0.45
    gravity: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, -9.81]))
    stabilization_gain: float = 20.0

    def __post_init__(self) -> None:
        self.inertia = np.asarray(self.inertia, dtype=float)
        self.hip_offsets = np.asarray(self.hip_offsets, dtype=float)
        self.thruster_offsets = np.asarray(self.thruster_offsets, dtype=float)
        self.gravity = np.asarray(self.gravity, dtype=float)
        self.validate()

    def validate(self) -> None:
        if self.mass <= 0.0:
            raise ScenarioError("mass must be positive")
        if self.inertia.shape != (3, 3):
            raise ScenarioError("inertia must be 3x3")
        if not np.allclose(self.inertia, self.inertia.T, atol=1e-12):
            raise ScenarioError("inertia must be symmetric")
        if np.any(np.linalg.eigvalsh(self.inertia) <= 0.0):
            raise ScenarioError("inertia must be positive definite")
        if self.hip_offsets.shape != (4, 3) or self.thruster_offsets.shape != (4, 3):
            raise ScenarioError("hip/thruster offsets must be 4x3")
        if not (0.0 < self.leg_length_min < self.leg_length_max):
            raise ScenarioError("leg length limits must satisfy 0 < min < max")
        if self.stabilization_gain < 0.0:
            raise ScenarioError("stabilization_gain must be >= 0")

    def to_dict(self) -> dict:
        return {
            "mass": float(self.mass),
            "inertia": self.inertia.tolist(),
            "hip_offsets": self.hip_offsets.tolist(),
            "thruster_offsets": self.thruster_offsets.tolist(),
            "leg_length_min": float(self.leg_length_min),
            "leg_length_max": float(self.leg_length_max),
            "gravity": self.gravity.tolist(),
            "stabilization_gain": float(self.stabilization_gain),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RobotParams":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ScenarioError(f"unknown robot parameter(s): {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_yaml(cls, path: str) -> "RobotParams":
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
        return cls.from_dict(data)

    def to_yaml(self, path: str) -> None:
        with open(path, "w") as fh:
            yaml.safe_dump(self.to_dict(), fh, sort_keys=True)
