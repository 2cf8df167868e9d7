"""State and control containers plus flat-array packing.

The episode state vector is 24-dimensional:

    [p(3), euler(3: yaw,pitch,roll), v(3), euler_rates(3), leg_q(12)]

with leg joint coordinates per leg ordered ``(phi, gamma, l)`` — hip pitch,
hip roll (abduction), prismatic length — stacked in LEG_NAMES order. The
generalized velocity for Jacobian work is 18-dimensional:
``[v(3), euler_rates(3), leg_rates(12)]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .params import LEG_NAMES

NUM_LEGS = 4
NQ_BODY = 6
NV = 18
NX = 24


@dataclass
class LegState:
    """One leg's joint coordinates: hip pitch, hip roll, prismatic length."""

    phi: float = 0.0
    gamma: float = 0.0
    length: float = 0.35

    def as_array(self) -> np.ndarray:
        return np.array([self.phi, self.gamma, self.length])


@dataclass
class HromState:
    """Torso pose/twist plus leg joints.

    ``leg_rates`` is a derived convenience channel (stance legs follow the
    body by inverse kinematics); it is carried so trajectories can be logged
    without recomputing, but it is not an independent dynamic state.
    """

    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    euler: np.ndarray = field(default_factory=lambda: np.zeros(3))
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    euler_rates: np.ndarray = field(default_factory=lambda: np.zeros(3))
    leg_q: np.ndarray = field(default_factory=lambda: np.tile([0.0, 0.0, 0.35], (4, 1)))
    leg_rates: np.ndarray = field(default_factory=lambda: np.zeros((4, 3)))

    def __post_init__(self) -> None:
        self.position = np.asarray(self.position, dtype=float)
        self.euler = np.asarray(self.euler, dtype=float)
        self.velocity = np.asarray(self.velocity, dtype=float)
        self.euler_rates = np.asarray(self.euler_rates, dtype=float)
        self.leg_q = np.asarray(self.leg_q, dtype=float).reshape(NUM_LEGS, 3)
        self.leg_rates = np.asarray(self.leg_rates, dtype=float).reshape(NUM_LEGS, 3)

    def pack(self) -> np.ndarray:
        return np.concatenate(
            [self.position, self.euler, self.velocity, self.euler_rates, self.leg_q.ravel()]
        )

    @classmethod
    def unpack(cls, x: np.ndarray, leg_rates: np.ndarray | None = None) -> "HromState":
        x = np.asarray(x, dtype=float)
        if x.shape != (NX,):
            raise ValueError(f"state vector must have shape ({NX},), got {x.shape}")
        return cls(
            position=x[0:3].copy(),
            euler=x[3:6].copy(),
            velocity=x[6:9].copy(),
            euler_rates=x[9:12].copy(),
            leg_q=x[12:24].reshape(NUM_LEGS, 3).copy(),
            leg_rates=np.zeros((4, 3)) if leg_rates is None else leg_rates,
        )

    def copy(self) -> "HromState":
        return HromState(
            self.position.copy(),
            self.euler.copy(),
            self.velocity.copy(),
            self.euler_rates.copy(),
            self.leg_q.copy(),
            self.leg_rates.copy(),
        )


@dataclass
class ThrustWrench:
    """Thruster wrench at the COM, expressed in the body frame."""

    force: np.ndarray = field(default_factory=lambda: np.zeros(3))
    moment: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self) -> None:
        self.force = np.asarray(self.force, dtype=float)
        self.moment = np.asarray(self.moment, dtype=float)

    @classmethod
    def zero(cls) -> "ThrustWrench":
        return cls()

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.force, self.moment])


@dataclass
class ControlInput:
    """Full input: COM wrench + per-leg kinematic commands.

    ``leg_rates`` drives swing legs (joint velocity command); ``leg_accel``
    is the stance-leg joint acceleration feed-forward that propels the body
    through the pinned feet. Entries for legs in the opposite role are
    ignored.
    """

    wrench: ThrustWrench = field(default_factory=ThrustWrench.zero)
    leg_rates: np.ndarray = field(default_factory=lambda: np.zeros((4, 3)))
    leg_accel: np.ndarray = field(default_factory=lambda: np.zeros((4, 3)))

    def __post_init__(self) -> None:
        self.leg_rates = np.asarray(self.leg_rates, dtype=float).reshape(NUM_LEGS, 3)
        self.leg_accel = np.asarray(self.leg_accel, dtype=float).reshape(NUM_LEGS, 3)


def leg_index(name: str) -> int:
    return LEG_NAMES.index(name)
