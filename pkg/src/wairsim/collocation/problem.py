"""Transcription of one gait phase into a solvable NLP.

Decision vector layout: all node states first, then all node controls,
each node-major — ``Y = [x_0 .. x_{n-1}, u_0 .. u_{n-1}]`` with the reduced
state/control dimensions from the phase context. Equalities are the
Hermite-Simpson defects (interval-major) followed by the initial-state pin
and, if enabled, the final-state pin. Inequalities are node-major: friction
cone rows per stance foot, then the stance leg-length window rows. Control
limits are hard box bounds on the (limit-scaled) decision entries.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..dynamics.params import RobotParams
from ..errors import GridMisaligned, SingularKKT
from ..fastpath import get_backend
from ..gait.plan import PhasePlan
from .context import PhaseContext

_BAD_MERIT = 1e12


@dataclass(frozen=True)
class NodeGrid:
    """Monotone node times spanning one contact-constant window."""

    times: np.ndarray

    @classmethod
    def from_window(cls, t0: float, t1: float, n_nodes: int) -> "NodeGrid":
        if n_nodes < 2:
            raise ValueError("need at least two nodes")
        if t1 <= t0:
            raise ValueError("window must have positive length")
        return cls(times=np.linspace(t0, t1, n_nodes))

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or len(t) < 2 or np.any(np.diff(t) <= 0.0):
            raise ValueError("node times must be strictly increasing")
        object.__setattr__(self, "times", t)

    def check_alignment(self, switch_times: np.ndarray, tol: float = 1e-9) -> None:
        """Raise GridMisaligned if a contact switch falls inside the window."""
        t0, t1 = self.times[0], self.times[-1]
        for ts in np.atleast_1d(switch_times):
            if t0 + tol < ts < t1 - tol:
                raise GridMisaligned(
                    f"contact switch at t={ts} inside collocation window [{t0}, {t1}]"
                )


@dataclass
class DecisionLayout:
    n_nodes: int
    nx: int
    nu: int

    @property
    def size(self) -> int:
        return self.n_nodes * (self.nx + self.nu)

    def pack(self, X: np.ndarray, U: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float).reshape(self.n_nodes, self.nx)
        U = np.asarray(U, dtype=float).reshape(self.n_nodes, self.nu)
        return np.concatenate([X.ravel(), U.ravel()])

    def unpack(self, Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        Y = np.asarray(Y, dtype=float)
        if Y.shape != (self.size,):
            raise ValueError(f"decision vector must have {self.size} entries")
        split = self.n_nodes * self.nx
        return (
            Y[:split].reshape(self.n_nodes, self.nx).copy(),
            Y[split:].reshape(self.n_nodes, self.nu).copy(),
        )

    def bounds(self) -> np.ndarray:
        # control entries are stored in limit-scaled units, hence the unit box
        b = np.full((self.size, 2), (-np.inf, np.inf))
        b[self.n_nodes * self.nx :] = (-1.0, 1.0)
        return b


class FusedEvaluator:
    """Adapter between a PhaseContext/backend pair and the NLP solver."""

    def __init__(self, ctx: PhaseContext, backend=None):
        self.ctx = ctx
        self.backend = backend or get_backend()

    def components(self, y: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        try:
            cost, eq, ineq, _ = self.backend.phase_eval(y, self.ctx)
        except (FloatingPointError, SingularKKT, np.linalg.LinAlgError):
            n = self.ctx
            return _BAD_MERIT, np.zeros(n.n_eq), np.zeros(n.n_ineq)
        return cost, eq, ineq

    def merit(self, y, mu_eq, mu_in, rho) -> float:
        try:
            return float(self.backend.al_merit(y, self.ctx, mu_eq, mu_in, rho))
        except (FloatingPointError, SingularKKT, np.linalg.LinAlgError):
            return _BAD_MERIT

    def merit_grad(self, y, mu_eq, mu_in, rho) -> np.ndarray:
        try:
            return np.asarray(self.backend.al_merit_grad(y, self.ctx, mu_eq, mu_in, rho))
        except (FloatingPointError, SingularKKT, np.linalg.LinAlgError):
            return np.zeros_like(np.asarray(y, dtype=float))

    def merit_and_grad(self, y, mu_eq, mu_in, rho) -> tuple[float, np.ndarray]:
        try:
            val, grad = self.backend.al_merit_and_grad(y, self.ctx, mu_eq, mu_in, rho)
            return float(val), np.asarray(grad)
        except (FloatingPointError, SingularKKT, np.linalg.LinAlgError):
            return _BAD_MERIT, np.zeros_like(np.asarray(y, dtype=float))

    def evaluate(self, y: np.ndarray) -> dict:
        cost, eq, ineq, lam = self.backend.phase_eval(y, self.ctx)
        return {"cost": cost, "eq": eq, "ineq": ineq, "lam_nodes": lam}


@dataclass
class TranscribedPhase:
    """NLP plus everything needed to interpret its solution."""

    context: PhaseContext
    layout: DecisionLayout
    guess: np.ndarray
    evaluator: FusedEvaluator
    metadata: dict = field(default_factory=dict)

    def unpack_physical(self, Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Node states and controls in physical units (N, N·m)."""
        X, U = self.layout.unpack(Y)
        return X, U * self.context.u_limits

    def nlp(self):
        from ..nlp.problem import NlpProblem

        ev = self.evaluator
        return NlpProblem(
            objective=lambda y: ev.components(y)[0],
            x0=self.guess.copy(),
            eq_constraints=lambda y: ev.components(y)[1],
            ineq_constraints=lambda y: ev.components(y)[2],
            bounds=self.layout.bounds(),
            name=self.metadata.get("name", "phase"),
            fused=ev,
            metadata=dict(self.metadata),
        )


@dataclass
class TranscriptionOptions:
    nodes_per_phase: int = 11
    planar: bool = True
    w_force: np.ndarray = field(default_factory=lambda: np.full(3, 1e-2))
    w_moment: np.ndarray = field(default_factory=lambda: np.full(3, 1e-1))
    n_min: float = 5.0
    n_min_margin: float = 2.0
    mu_margin: float = 0.05
    f_max: float = 60.0
    m_max: float = 15.0
    cone_form: str = "exact"
    cone_smoothing: float = 0.05
    reach_margin: float = 0.01
    enforce_final_state: bool = False


def _resample_chi(phase: PhasePlan, eval_times: np.ndarray) -> np.ndarray:
    """Linear resample of the plan's stance-drive table onto the eval grid."""
    stance = list(phase.stance_legs)
    out = np.zeros((len(eval_times), len(stance), 3))
    src_t = phase.chi_times
    for col, leg in enumerate(stance):
        for comp in range(3):
            out[:, col, comp] = np.interp(eval_times, src_t, phase.chi[:, leg, comp])
    return out


def transcribe(
    phase: PhasePlan,
    params: RobotParams,
    x_init_full: np.ndarray,
    reference_body_state,
    options: TranscriptionOptions | None = None,
    grid: NodeGrid | None = None,
    xf_full: np.ndarray | None = None,
    backend=None,
    name: str | None = None,
) -> TranscribedPhase:
    """Build the phase NLP.

    ``x_init_full`` is the chained 12-dim body state at the window start;
    ``reference_body_state(t)`` supplies 12-dim guesses at node times.
    """
    opts = options or TranscriptionOptions()
    grid = grid or NodeGrid.from_window(phase.t_start, phase.t_end, opts.nodes_per_phase)
    grid.check_alignment(np.array([phase.t_start, phase.t_end]))
    if grid.times[0] < phase.t_start - 1e-9 or grid.times[-1] > phase.t_end + 1e-9:
        raise GridMisaligned("grid extends outside the phase window")

    stance = list(phase.stance_legs)
    if len(stance) > 2:
        raise SingularKKT("phase transcription supports at most two stance feet")
    contacts = phase.contacts
    times = grid.times
    eval_times = np.empty(2 * len(times) - 1)
    eval_times[0::2] = times
    eval_times[1::2] = 0.5 * (times[:-1] + times[1:])

    x_init_full = np.asarray(x_init_full, dtype=float).reshape(12)
    ctx = PhaseContext(
        times=times,
        planar=opts.planar,
        x_template=x_init_full.copy(),
        x0_bc=np.zeros(6 if opts.planar else 12),
        stance_hips=params.hip_offsets[stance],
        anchors=contacts.anchors[stance],
        normals=contacts.normals[stance],
        mu_eff=contacts.friction[stance] * (1.0 - opts.mu_margin),
        chi=_resample_chi(phase, eval_times),
        mass=params.mass,
        inertia=params.inertia,
        gravity=params.gravity,
        n_min_eff=opts.n_min + opts.n_min_margin,
        f_max=opts.f_max,
        m_max=opts.m_max,
        w_force=np.asarray(opts.w_force, dtype=float),
        w_moment=np.asarray(opts.w_moment, dtype=float),
        cone_form=opts.cone_form,
        cone_smoothing=opts.cone_smoothing,
        l_min_eff=params.leg_length_min + opts.reach_margin,
        l_max_eff=params.leg_length_max - opts.reach_margin,
        xf_bc=None,
    )
    ctx.x0_bc = x_init_full[ctx.state_free_idx].copy()
    if opts.enforce_final_state:
        xf = (
            np.asarray(xf_full, dtype=float).reshape(12)
            if xf_full is not None
            else np.asarray(reference_body_state(times[-1]), dtype=float).reshape(12)
        )
        ctx.xf_bc = xf[ctx.state_free_idx].copy()

    layout = DecisionLayout(n_nodes=len(times), nx=ctx.nx, nu=ctx.nu)
    X_guess = np.zeros((layout.n_nodes, ctx.nx))
    X_guess[0] = ctx.x0_bc
    for i, t in enumerate(times[1:], start=1):
        X_guess[i] = np.asarray(reference_body_state(t), dtype=float).reshape(12)[
            ctx.state_free_idx
        ]
    guess = layout.pack(X_guess, np.zeros((layout.n_nodes, ctx.nu)))

    evaluator = FusedEvaluator(ctx, backend=backend)
    meta = {
        "name": name or f"phase{phase.index}",
        "phase_index": phase.index,
        "stance_legs": stance,
        "window": [float(times[0]), float(times[-1])],
    }
    return TranscribedPhase(
        context=ctx, layout=layout, guess=guess, evaluator=evaluator, metadata=meta
    )


def dump_problem(path: str, transcribed: TranscribedPhase) -> None:
    """Serialize a transcribed phase (context + guess) for regression capture."""
    payload = {
        "context": transcribed.context.to_dict(),
        "guess": transcribed.guess.tolist(),
        "metadata": transcribed.metadata,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True)


def load_problem(path: str, backend=None) -> TranscribedPhase:
    with open(path) as fh:
        payload = json.load(fh)
    ctx = PhaseContext.from_dict(payload["context"])
    layout = DecisionLayout(n_nodes=ctx.n_nodes, nx=ctx.nx, nu=ctx.nu)
    return TranscribedPhase(
        context=ctx,
        layout=layout,
        guess=np.asarray(payload["guess"], dtype=float),
        evaluator=FusedEvaluator(ctx, backend=backend),
        metadata=payload.get("metadata", {}),
    )
