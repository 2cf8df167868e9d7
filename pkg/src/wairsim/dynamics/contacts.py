"""Contact bookkeeping: which feet are pinned where, and what they carry."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .state import NUM_LEGS


@dataclass
class ContactSet:
    """Active stance set: per-leg flag, world anchor, surface normal, friction.

    ``anchors`` rows are world foothold positions; rows for swing legs are
    ignored. Normals must be unit vectors pointing away from the surface.
    """

    stance: np.ndarray = field(default_factory=lambda: np.zeros(4, dtype=bool))
    anchors: np.ndarray = field(default_factory=lambda: np.zeros((4, 3)))
    normals: np.ndarray = field(default_factory=lambda: np.tile([0.0, 0.0, 1.0], (4, 1)))
    friction: np.ndarray = field(default_factory=lambda: np.full(4, 0.35))

    def __post_init__(self) -> None:
        self.stance = np.asarray(self.stance, dtype=bool).reshape(NUM_LEGS)
        self.anchors = np.asarray(self.anchors, dtype=float).reshape(NUM_LEGS, 3)
        self.normals = np.asarray(self.normals, dtype=float).reshape(NUM_LEGS, 3)
        self.friction = np.asarray(self.friction, dtype=float).reshape(NUM_LEGS)
        norms = np.linalg.norm(self.normals, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise ValueError("contact normals must be unit vectors")

    @property
    def stance_indices(self) -> np.ndarray:
        return np.flatnonzero(self.stance)

    @property
    def num_stance(self) -> int:
        return int(np.count_nonzero(self.stance))

    def copy(self) -> "ContactSet":
        return ContactSet(
            self.stance.copy(), self.anchors.copy(), self.normals.copy(), self.friction.copy()
        )


@dataclass
class GroundReaction:
    """Contact forces from one dynamics evaluation.

    ``forces`` holds the world-frame reaction on each foot (zero rows for
    swing legs); ``wrench`` is the equivalent generalized force on the body
    coordinates (J_body^T lambda summed over stance feet, 6-vector).
    """

    forces: np.ndarray
    wrench: np.ndarray

    def normal_tangential(self, contacts: ContactSet) -> tuple[np.ndarray, np.ndarray]:
        """Per-leg normal components and tangential magnitudes."""
        n = np.einsum("ij,ij->i", self.forces, contacts.normals)
        t_vec = self.forces - n[:, None] * contacts.normals
        return n, np.linalg.norm(t_vec, axis=1)
