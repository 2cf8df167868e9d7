"""Phase schedule: which legs stand during which window."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dynamics.params import DIAGONAL_PAIRS
from ..errors import ScenarioError


@dataclass(frozen=True)
class GaitSchedule:
    """Fixed-duration phases alternating diagonal stance pairs.

    ``mode`` is "trot" (alternating diagonal pairs, the other pair swings) or
    "stand" (a constant stance set, nobody swings).
    """

    phase_duration: float = 0.5
    num_phases: int = 12
    t0: float = 0.0
    mode: str = "trot"
    first_pair: int = 0
    stand_legs: tuple[int, ...] = field(default=(0, 3))

    def __post_init__(self) -> None:
        if self.phase_duration <= 0.0:
            raise ScenarioError("phase_duration must be positive")
        if self.num_phases < 1:
            raise ScenarioError("num_phases must be >= 1")
        if self.mode not in ("trot", "stand"):
            raise ScenarioError(f"unknown gait mode {self.mode!r}")
        if self.first_pair not in (0, 1):
            raise ScenarioError("first_pair must be 0 or 1")

    @property
    def duration(self) -> float:
        return self.phase_duration * self.num_phases

    def phase_index(self, t: float) -> int:
        k = int(np.floor((t - self.t0) / self.phase_duration))
        return int(np.clip(k, 0, self.num_phases - 1))

    def phase_window(self, k: int) -> tuple[float, float]:
        if not 0 <= k < self.num_phases:
            raise IndexError(f"phase {k} outside 0..{self.num_phases - 1}")
        return (self.t0 + k * self.phase_duration, self.t0 + (k + 1) * self.phase_duration)

    def stance_legs(self, k: int) -> tuple[int, ...]:
        if self.mode == "stand":
            return tuple(self.stand_legs)
        return DIAGONAL_PAIRS[(self.first_pair + k) % 2]

    def swing_legs(self, k: int) -> tuple[int, ...]:
        stance = set(self.stance_legs(k))
        return tuple(leg for leg in range(4) if leg not in stance)

    def in_stance(self, leg: int, k: int) -> bool:
        return leg in self.stance_legs(k)
