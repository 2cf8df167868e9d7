"""Flat, backend-neutral description of one phase optimization problem.

Everything the hot evaluation loop needs is precomputed into plain arrays so
the compiled and pure-python backends can share one contract. The body state
is reduced to its free coordinates (planar: x, z, pitch and rates); frozen
coordinates come from ``x_template``. The stance drive ``chi`` is tabulated
exactly on the evaluation grid (nodes interleaved with interval midpoints),
so the evaluator never interpolates it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Index sets for the 12-dim body state [p(3), euler(3), v(3), euler_rates(3)].
PLANAR_STATE_IDX = np.array([0, 2, 4, 6, 8, 10], dtype=np.int64)
FULL_STATE_IDX = np.arange(12, dtype=np.int64)
# Index sets for the 6-dim wrench [force(3), moment(3)], body frame.
PLANAR_WRENCH_IDX = np.array([0, 2, 4], dtype=np.int64)
FULL_WRENCH_IDX = np.arange(6, dtype=np.int64)
# Free body-velocity coordinates and active constraint rows.
PLANAR_BODY_IDX = np.array([0, 2, 4], dtype=np.int64)
FULL_BODY_IDX = np.arange(6, dtype=np.int64)
PLANAR_FOOT_ROWS = np.array([0, 2], dtype=np.int64)
FULL_FOOT_ROWS = np.arange(3, dtype=np.int64)

CONE_ROWS = {"exact": 2, "pyramid": 5}


@dataclass
class PhaseContext:
    """One phase's arrays; see module docstring for conventions."""

    times: np.ndarray
    planar: bool
    x_template: np.ndarray
    x0_bc: np.ndarray
    stance_hips: np.ndarray
    anchors: np.ndarray
    normals: np.ndarray
    mu_eff: np.ndarray
    chi: np.ndarray  # (2n-1, n_c, 3) on the node+midpoint grid
    mass: float
    inertia: np.ndarray
    gravity: np.ndarray
    n_min_eff: float
    f_max: float
    m_max: float
    w_force: np.ndarray
    w_moment: np.ndarray
    cone_form: str = "exact"
    cone_smoothing: float = 0.05
    # leg-length window for stance reachability rows; the contact KKT system
    # degenerates as the hip approaches its anchor (D loses rank with the leg
    # folded), so the admissible window must exclude that region outright
    l_min_eff: float = 0.0
    l_max_eff: float = 10.0
    xf_bc: np.ndarray | None = None
    squeeze: np.ndarray | None = field(default=None)

    def __post_init__(self) -> None:
        self.times = np.ascontiguousarray(self.times, dtype=float)
        self.x_template = np.ascontiguousarray(self.x_template, dtype=float)
        self.x0_bc = np.ascontiguousarray(self.x0_bc, dtype=float)
        self.stance_hips = np.ascontiguousarray(self.stance_hips, dtype=float).reshape(-1, 3)
        self.anchors = np.ascontiguousarray(self.anchors, dtype=float).reshape(-1, 3)
        self.normals = np.ascontiguousarray(self.normals, dtype=float).reshape(-1, 3)
        self.mu_eff = np.ascontiguousarray(self.mu_eff, dtype=float).ravel()
        self.chi = np.ascontiguousarray(self.chi, dtype=float)
        self.inertia = np.ascontiguousarray(self.inertia, dtype=float)
        self.gravity = np.ascontiguousarray(self.gravity, dtype=float)
        self.w_force = np.ascontiguousarray(self.w_force, dtype=float)
        self.w_moment = np.ascontiguousarray(self.w_moment, dtype=float)
        if self.xf_bc is not None:
            self.xf_bc = np.ascontiguousarray(self.xf_bc, dtype=float)
        n_c = self.anchors.shape[0]
        if n_c == 2 and self.squeeze is None:
            rows = self.foot_rows
            d = (self.anchors[0] - self.anchors[1])[rows]
            nrm = np.linalg.norm(d)
            if nrm < 1e-9:
                raise ValueError("stance anchors coincide in the active plane")
            self.squeeze = np.ascontiguousarray(
                np.concatenate([d, -d]) / (np.sqrt(2.0) * nrm)
            )
        if self.cone_form not in CONE_ROWS:
            raise ValueError(f"unknown cone form {self.cone_form!r}")
        if self.chi.shape != (2 * self.n_nodes - 1, n_c, 3):
            raise ValueError("chi must be tabulated on the node+midpoint grid")

    @property
    def n_nodes(self) -> int:
        return len(self.times)

    @property
    def n_contacts(self) -> int:
        return self.anchors.shape[0]

    @property
    def state_free_idx(self) -> np.ndarray:
        return PLANAR_STATE_IDX if self.planar else FULL_STATE_IDX

    @property
    def u_free_idx(self) -> np.ndarray:
        return PLANAR_WRENCH_IDX if self.planar else FULL_WRENCH_IDX

    @property
    def body_idx(self) -> np.ndarray:
        return PLANAR_BODY_IDX if self.planar else FULL_BODY_IDX

    @property
    def foot_rows(self) -> np.ndarray:
        return PLANAR_FOOT_ROWS if self.planar else FULL_FOOT_ROWS

    @property
    def nx(self) -> int:
        return len(self.state_free_idx)

    @property
    def nu(self) -> int:
        return len(self.u_free_idx)

    @property
    def u_limits(self) -> np.ndarray:
        """Per-column control magnitude limits (force vs moment entries).

        Decision vectors carry controls divided by these limits: unit-box
        columns keep the quasi-Newton model decently conditioned against the
        much stiffer state columns of the defect Jacobian.
        """
        return np.where(self.u_free_idx < 3, self.f_max, self.m_max)

    @property
    def cone_scale(self) -> float:
        """Cone rows are expressed in body weights, not newtons.

        Raw contact-force rows sit two to three orders of magnitude above the
        position defects; one shared penalty over both families would leave
        the quasi-Newton inner loop crawling along the stiff cone walls.
        """
        return 1.0 / (self.mass * float(np.linalg.norm(self.gravity)))

    @property
    def n_cone_rows(self) -> int:
        return CONE_ROWS[self.cone_form]

    @property
    def n_eq(self) -> int:
        n = self.nx * (self.n_nodes - 1) + self.nx
        if self.xf_bc is not None:
            n += self.nx
        return n

    @property
    def n_ineq(self) -> int:
        # per node: cone rows, then leg-length reach rows (control bounds are
        # hard box constraints on the decision vector, not penalty rows)
        per_node = self.n_contacts * (self.n_cone_rows + 2)
        return per_node * self.n_nodes

    def to_dict(self) -> dict:
        out = {
            "times": self.times.tolist(),
            "planar": bool(self.planar),
            "x_template": self.x_template.tolist(),
            "x0_bc": self.x0_bc.tolist(),
            "stance_hips": self.stance_hips.tolist(),
            "anchors": self.anchors.tolist(),
            "normals": self.normals.tolist(),
            "mu_eff": self.mu_eff.tolist(),
            "chi": self.chi.tolist(),
            "mass": float(self.mass),
            "inertia": self.inertia.tolist(),
            "gravity": self.gravity.tolist(),
            "n_min_eff": float(self.n_min_eff),
            "f_max": float(self.f_max),
            "m_max": float(self.m_max),
            "w_force": self.w_force.tolist(),
            "w_moment": self.w_moment.tolist(),
            "cone_form": self.cone_form,
            "cone_smoothing": float(self.cone_smoothing),
            "l_min_eff": float(self.l_min_eff),
            "l_max_eff": float(self.l_max_eff),
            "xf_bc": None if self.xf_bc is None else self.xf_bc.tolist(),
        }
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "PhaseContext":
        kwargs = dict(data)
        for key in (
            "times",
            "x_template",
            "x0_bc",
            "stance_hips",
            "anchors",
            "normals",
            "mu_eff",
            "chi",
            "inertia",
            "gravity",
            "w_force",
            "w_moment",
        ):
            kwargs[key] = np.asarray(kwargs[key], dtype=float)
        if kwargs.get("xf_bc") is not None:
            kwargs["xf_bc"] = np.asarray(kwargs["xf_bc"], dtype=float)
        return cls(**kwargs)
