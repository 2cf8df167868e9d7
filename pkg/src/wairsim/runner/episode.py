"""Phase-chained wrench planning plus forward integration of the tracked gait.

Each stance phase gets its own collocation solve; phases are chained by
pinning the next problem's initial state to the *integrated* state at the
hand-off, and warm-starting it with the previous phase's control profile and
multipliers.  The integrator runs the full contact-consistent dynamics (not
the collocation interpolant), so the logged ground reactions are an
independent recomputation of what the plan promised, and the deviation
between the two is reported rather than hidden.

With two stance feet in the sagittal plane the pinned-foot closure determines
the body motion from the stance-joint drive alone; the wrench redistributes
the contact forces without steering the gait.  That is why a no-thrust run
(``thrust: false``) follows the same motion while its reactions leave the
friction cone -- the comparison the planner exists to win.  Stance joints are
tracked by a PD servo around their reference trajectory (wrench stays pure
feed-forward); see _PhaseTracker.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..collocation.problem import TranscribedPhase, transcribe
from ..dynamics.kinematics import foot_position, ik_leg_rates, leg_ik
from ..dynamics.model import (
    FULL_3D,
    SAGITTAL,
    kinetic_energy,
    potential_energy,
    rk4_step,
    state_derivative,
)
from ..dynamics.params import LEG_NAMES, RobotParams
from ..dynamics.state import ControlInput, HromState, ThrustWrench
from ..errors import IntegrationDiverged, PhaseSolveFailed
from ..gait.plan import GaitPlan, PhasePlan
from ..nlp.auglag import solve
from ..spatial import euler_to_rotation
from .scenario import Scenario, scenario_hash

_WARM_RHO = 1.0e3  # penalty restart level when duals are carried over


@dataclass
class PhaseRecord:
    """Per-phase solver outcome and tracking diagnostics."""

    index: int
    t_start: float
    t_end: float
    stance_legs: tuple[int, ...]
    status: str
    objective: float = np.nan
    max_violation: float = np.nan
    kkt_residual: float = np.nan
    outer_iterations: int = 0
    inner_iterations: int = 0
    n_evaluations: int = 0
    wall_time: float = 0.0
    touchdown_miss: float = np.nan
    plan_deviation: float = np.nan
    # node-grid solution kept for downstream checks; not exported to CSV
    node_times: np.ndarray | None = None
    X: np.ndarray | None = None
    U: np.ndarray | None = None

    @property
    def stance_label(self) -> str:
        return "+".join(LEG_NAMES[i] for i in self.stance_legs)

    def row(self) -> dict:
        """Deterministic scalar view for the phases table (no wall clock)."""
        return {
            "index": self.index,
            "t_start": self.t_start,
            "t_end": self.t_end,
            "stance": self.stance_label,
            "status": self.status,
            "objective": self.objective,
            "max_violation": self.max_violation,
            "kkt_residual": self.kkt_residual,
            "outer_iterations": self.outer_iterations,
            "inner_iterations": self.inner_iterations,
            "n_evaluations": self.n_evaluations,
            "touchdown_miss": self.touchdown_miss,
            "plan_deviation": self.plan_deviation,
        }


@dataclass
class EpisodeLog:
    """Sampled trajectory: one row per log instant, arrays column-major."""

    times: np.ndarray          # (N,)
    body: np.ndarray           # (N, 12) position, euler, velocity, euler rates
    wrench: np.ndarray         # (N, 6) applied thrust force (body) + moment (world)
    forces: np.ndarray         # (N, 4, 3) world-frame ground reactions
    normal: np.ndarray         # (N, 4) reaction component along the surface normal
    tangential: np.ndarray     # (N, 4) in-surface reaction magnitude
    ratio: np.ndarray          # (N, 4) tangential/normal, NaN off stance
    margin: np.ndarray         # (N, 4) mu*normal - tangential, NaN off stance
    stance: np.ndarray         # (N, 4) 0/1
    phase: np.ndarray          # (N,)
    leg_q: np.ndarray          # (N, 4, 3)
    kinetic: np.ndarray        # (N,)
    potential: np.ndarray      # (N,)
    constraint_residual: np.ndarray  # (N,)
    squeeze_residual: np.ndarray     # (N,)

    def __len__(self) -> int:
        return len(self.times)


@dataclass
class EpisodeResult:
    scenario: Scenario
    scenario_hash: str
    log: EpisodeLog
    phases: list[PhaseRecord]
    final_state: HromState
    backend_name: str

    def summary(self) -> dict:
        log = self.log
        on = log.stance.astype(bool)
        fn = log.normal[on]
        ratio = log.ratio[on]
        margin = log.margin[on]
        mean_wrench = log.wrench.mean(axis=0)
        duration = float(log.times[-1] - log.times[0])
        out = {
            "scenario": self.scenario.name,
            "hash": self.scenario_hash,
            "seed": self.scenario.seed,
            "thrust": bool(self.scenario.thrust),
            "backend": self.backend_name,
            "duration": duration,
            "samples": len(log),
            "contact": {
                "min_normal": float(fn.min()),
                "max_ratio": float(np.nanmax(ratio)),
                "min_margin": float(np.nanmin(margin)),
                "stance_samples": int(on.sum()),
            },
            "thrust_stats": {
                "mean_force": [float(v) for v in mean_wrench[:3]],
                "mean_moment": [float(v) for v in mean_wrench[3:]],
                "peak_force": float(np.abs(log.wrench[:, :3]).max()),
                "forward_impulse": float(mean_wrench[0] * duration),
            },
            "tracking": {
                "max_touchdown_miss": _nan_max(r.touchdown_miss for r in self.phases),
                "max_plan_deviation": _nan_max(r.plan_deviation for r in self.phases),
                "max_constraint_residual": float(log.constraint_residual.max()),
                "max_squeeze_residual": float(log.squeeze_residual.max()),
            },
            "energy": {
                "initial": float(log.kinetic[0] + log.potential[0]),
                "final": float(log.kinetic[-1] + log.potential[-1]),
            },
            "body_initial": [float(v) for v in log.body[0]],
            "body_final": [float(v) for v in log.body[-1]],
            "phases": [r.row() for r in self.phases],
        }
        return out


def _nan_max(values) -> float:
    vals = [v for v in values if np.isfinite(v)]
    return float(max(vals)) if vals else float("nan")


def _body12(state: HromState) -> np.ndarray:
    return np.concatenate(
        [state.position, state.euler, state.velocity, state.euler_rates]
    )


def _initial_state(
    reference, plan: GaitPlan, params: RobotParams, t0: float
) -> HromState:
    body = reference.body_state(t0)
    state = HromState(
        position=body[0:3],
        euler=body[3:6],
        velocity=body[6:9],
        euler_rates=body[9:12],
        leg_q=np.zeros((4, 3)),
        leg_rates=np.zeros((4, 3)),
    )
    R = euler_to_rotation(state.euler)
    first = plan.phases[0]
    limits = (params.leg_length_min, params.leg_length_max)
    for leg in range(4):
        if first.contacts.stance[leg]:
            target = first.contacts.anchors[leg]
        elif leg in first.swing_curves:
            target = first.swing_curves[leg].start
        else:
            target = plan.initial_anchors[leg]
        state.leg_q[leg] = leg_ik(
            state.position, R, params.hip_offsets[leg], target, limits
        )
    return state


class _PhaseTracker:
    """Control sampler for one phase: planned wrench + swing/stance commands.

    The wrench is pure feed-forward from the collocation solution.  The
    stance drive is the planned joint acceleration plus a joint-space PD
    servo around the reference joint trajectory: with the feet pinned, the
    body pose is kinematically slaved to the stance joints, so acceleration
    feed-forward alone is an (unstable) inverted pendulum and the servo is
    what a position-controlled leg provides anyway.
    """

    def __init__(
        self,
        phase: PhasePlan,
        plan: GaitPlan,
        params: RobotParams,
        node_times: np.ndarray | None,
        U: np.ndarray | None,
        u_free_idx: np.ndarray | None,
        kp: float,
        kd: float,
    ):
        self.phase = phase
        self.plan = plan
        self.params = params
        self.node_times = node_times
        self.U = U
        self.u_free_idx = u_free_idx
        self.kp = kp
        self.kd = kd

    def wrench_at(self, t: float) -> np.ndarray:
        w = np.zeros(6)
        if self.U is not None:
            for j, col in enumerate(self.u_free_idx):
                w[col] = np.interp(t, self.node_times, self.U[:, j])
        return w

    def _stance_joint_ref(self, leg: int, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Reference joint position/rate: leg IK along the reference pose."""
        anchor = self.phase.contacts.anchors[leg]
        reference = self.plan.reference
        hip = self.params.hip_offsets[leg]

        def ik_at(tq: float) -> np.ndarray:
            pos, eul = reference.pose(tq)
            return leg_ik(pos, euler_to_rotation(eul), hip, anchor)

        h = 1e-4
        # the pose table clamps at its ends; keep the stencil interior or the
        # rate halves right at the boundary sample
        tc = min(max(t, reference.t0 + h), reference.t0 + reference.duration - h)
        q_ref = ik_at(t)
        qd_ref = (ik_at(tc + h) - ik_at(tc - h)) / (2.0 * h)
        return q_ref, qd_ref

    def control_at(self, state: HromState, t: float) -> ControlInput:
        phase = self.phase
        w = self.wrench_at(t)
        chi = self.plan.stance_drive_at(phase, t)
        if self.kp > 0.0 or self.kd > 0.0:
            for leg in phase.stance_legs:
                q_ref, qd_ref = self._stance_joint_ref(leg, t)
                chi[leg] = (
                    chi[leg]
                    + self.kp * (q_ref - state.leg_q[leg])
                    + self.kd * (qd_ref - state.leg_rates[leg])
                )
        leg_rates = np.zeros((4, 3))
        s = np.clip((t - phase.t_start) / (phase.t_end - phase.t_start), 0.0, 1.0)
        for leg, curve in phase.swing_curves.items():
            err = foot_position(state, self.params, leg) - curve.position(s)
            leg_rates[leg] = ik_leg_rates(
                state,
                self.params,
                leg,
                target_velocity=curve.velocity(s),
                position_error=err,
                gain=self.params.stabilization_gain,
            )
        return ControlInput(
            wrench=ThrustWrench(force=w[0:3], moment=w[3:6]),
            leg_rates=leg_rates,
            leg_accel=chi,
        )


def _pin_rates(state: HromState, phase: PhasePlan, params: RobotParams) -> None:
    """Reconstruct stance joint rates in place.

    Leg rates are not part of the packed state -- massless legs are slaved,
    not integrated -- but the contact bias needs the pin-consistent rates
    (the 2*omega x cdot and Jacobian-rate terms), so they have to be rebuilt
    from the body twist before every dynamics evaluation.
    """
    gain = params.stabilization_gain
    for leg in phase.stance_legs:
        err = foot_position(state, params, leg) - phase.contacts.anchors[leg]
        state.leg_rates[leg] = ik_leg_rates(
            state, params, leg, position_error=err, gain=gain
        )


class _LogAccumulator:
    def __init__(self):
        self.cols = {name: [] for name in (
            "times", "body", "wrench", "forces", "normal", "tangential",
            "ratio", "margin", "stance", "phase", "leg_q", "kinetic",
            "potential", "constraint_residual", "squeeze_residual",
        )}

    def sample(
        self,
        t: float,
        state: HromState,
        tracker: _PhaseTracker,
        params: RobotParams,
        mask,
    ) -> None:
        phase = tracker.phase
        _pin_rates(state, phase, params)
        ctrl = tracker.control_at(state, t)
        sd = state_derivative(state, params, phase.contacts, ctrl, mask=mask)
        fn, ft = sd.reaction.normal_tangential(phase.contacts)
        ratio = np.full(4, np.nan)
        margin = np.full(4, np.nan)
        for leg in phase.stance_legs:
            margin[leg] = phase.contacts.friction[leg] * fn[leg] - ft[leg]
            ratio[leg] = ft[leg] / fn[leg] if fn[leg] > 1e-9 else np.inf
        c = self.cols
        c["times"].append(t)
        c["body"].append(_body12(state))
        c["wrench"].append(tracker.wrench_at(t))
        c["forces"].append(sd.reaction.forces.copy())
        c["normal"].append(np.where(phase.contacts.stance, fn, np.nan))
        c["tangential"].append(np.where(phase.contacts.stance, ft, np.nan))
        c["ratio"].append(ratio)
        c["margin"].append(margin)
        c["stance"].append(phase.contacts.stance.astype(int))
        c["phase"].append(phase.index)
        c["leg_q"].append(state.leg_q.copy())
        c["kinetic"].append(kinetic_energy(state, params))
        c["potential"].append(potential_energy(state, params))
        c["constraint_residual"].append(sd.constraint_residual)
        c["squeeze_residual"].append(sd.squeeze_residual)

    def build(self) -> EpisodeLog:
        c = self.cols
        return EpisodeLog(**{k: np.asarray(v) for k, v in c.items()})


def _check_state(x: np.ndarray, t: float, terrain) -> None:
    if not np.all(np.isfinite(x)):
        raise IntegrationDiverged(f"non-finite state at t={t:.4f}")
    if abs(x[4]) > np.pi / 2 - 1e-3:
        raise IntegrationDiverged(f"pitch {x[4]:.3f} rad at gimbal limit, t={t:.4f}")
    height = x[2] - terrain.height(x[0])
    if not (-1.0 < height < 5.0):
        raise IntegrationDiverged(f"body height {height:.2f} m off terrain, t={t:.4f}")
    if np.max(np.abs(x[6:12])) > 50.0:
        raise IntegrationDiverged(f"velocity blow-up at t={t:.4f}")


def _solve_phase(
    phase: PhasePlan,
    params: RobotParams,
    state: HromState,
    reference,
    options,
    solver_options,
    backend,
    warm: dict | None,
    u_guess_dec: np.ndarray | None,
    jitter: float,
    rng: np.random.Generator,
) -> tuple[PhaseRecord, TranscribedPhase, object]:
    tp = transcribe(
        phase,
        params,
        _body12(state),
        reference.body_state,
        options=options,
        backend=backend,
        name=f"phase{phase.index:02d}",
    )
    problem = tp.nlp()
    x0 = problem.x0
    if u_guess_dec is not None and u_guess_dec.shape == (tp.layout.n_nodes, tp.layout.nu):
        Xg, _ = tp.layout.unpack(x0)
        x0 = tp.layout.pack(Xg, u_guess_dec)
    if jitter > 0.0:
        # deterministic tie-break: identical seeds reproduce bit-identical runs
        x0 = x0 + jitter * rng.standard_normal(x0.shape)
    b = problem.bounds
    problem.x0 = np.clip(x0, b[:, 0], b[:, 1])
    t_wall = time.perf_counter()
    report = solve(problem, solver_options, warm=warm)
    wall = time.perf_counter() - t_wall
    record = PhaseRecord(
        index=phase.index,
        t_start=phase.t_start,
        t_end=phase.t_end,
        stance_legs=tuple(phase.stance_legs),
        status=report.status,
        objective=report.objective,
        max_violation=report.max_violation,
        kkt_residual=report.kkt_residual,
        outer_iterations=report.outer_iterations,
        inner_iterations=report.inner_iterations,
        n_evaluations=report.n_evaluations,
        wall_time=wall,
    )
    if not report.converged:
        raise PhaseSolveFailed(
            f"phase {phase.index} ({record.stance_label}) did not converge: "
            f"status={report.status} violation={report.max_violation:.2e} "
            f"kkt={report.kkt_residual:.2e} -- {report.message}"
        )
    X, U = tp.unpack_physical(report.x)
    record.node_times = tp.context.times.copy()
    record.X = X
    record.U = U
    return record, tp, report


def run_episode(
    scenario: Scenario,
    backend=None,
    progress=None,
) -> EpisodeResult:
    """Plan and integrate one full scenario.

    ``progress`` is called with each PhaseRecord as it completes.  Raises
    PhaseSolveFailed if any phase NLP fails to converge and
    IntegrationDiverged if the integrated state leaves sanity bounds.
    """
    scenario.validate()
    params, terrain, schedule, reference, plan = scenario.build_plan()
    options = scenario.transcription_options()
    solver_options = scenario.solver_options()
    mask = SAGITTAL if options.planar else FULL_3D
    dt = float(scenario.sim["dt"])
    stride = round(1.0 / (dt * float(scenario.sim["log_hz"])))
    jitter = float(scenario.sim["guess_jitter"])
    kp = float(scenario.sim["stance_kp"])
    kd = float(scenario.sim["stance_kd"])
    rng = np.random.default_rng(scenario.seed)
    limits = (params.leg_length_min, params.leg_length_max)

    from ..fastpath import BACKEND_NAME, get_backend

    backend_mod = get_backend(backend) if isinstance(backend, str) else backend
    backend_name = getattr(backend_mod, "NAME", None) or BACKEND_NAME

    state = _initial_state(reference, plan, params, schedule.t0)
    log = _LogAccumulator()
    records: list[PhaseRecord] = []
    warm = None
    u_dec_prev = None
    global_step = 0
    tracker = None

    for phase in plan.phases:
        # pin the entering stance feet to their anchors; the gap is the
        # touchdown error the swing controller left behind
        R = euler_to_rotation(state.euler)
        miss = 0.0
        for leg in phase.stance_legs:
            target = phase.contacts.anchors[leg]
            gap = foot_position(state, params, leg) - target
            miss = max(miss, float(np.linalg.norm(gap)))
            state.leg_q[leg] = leg_ik(
                state.position, R, params.hip_offsets[leg], target, limits
            )

        if scenario.thrust:
            record, tp, report = _solve_phase(
                phase, params, state, reference, options, solver_options,
                backend_mod, warm, u_dec_prev, jitter, rng,
            )
            u_dec_prev = tp.layout.unpack(report.x)[1]
            warm = {
                "mu_eq": report.multipliers_eq,
                "mu_in": report.multipliers_ineq,
                "rho": _WARM_RHO,
            }
            tracker = _PhaseTracker(
                phase, plan, params, record.node_times, record.U,
                tp.context.u_free_idx, kp, kd,
            )
            sfree = tp.context.state_free_idx
        else:
            record = PhaseRecord(
                index=phase.index,
                t_start=phase.t_start,
                t_end=phase.t_end,
                stance_legs=tuple(phase.stance_legs),
                status="open-loop",
            )
            tracker = _PhaseTracker(phase, plan, params, None, None, None, kp, kd)
            sfree = None
        record.touchdown_miss = miss

        n_steps = round((phase.t_end - phase.t_start) / dt)
        node_steps = {}
        if record.node_times is not None:
            node_steps = {
                int(round((tn - phase.t_start) / dt)): k
                for k, tn in enumerate(record.node_times)
            }

        deviation = 0.0
        for i in range(n_steps):
            t = phase.t_start + i * dt
            if i in node_steps:
                diff = _body12(state)[sfree] - record.X[node_steps[i]]
                deviation = max(deviation, float(np.max(np.abs(diff))))
            if global_step % stride == 0:
                log.sample(t, state, tracker, params, mask)

            def f(x, ti):
                st = HromState.unpack(x)
                _pin_rates(st, phase, params)
                ctrl = tracker.control_at(st, ti)
                return state_derivative(
                    st, params, phase.contacts, ctrl, mask=mask
                ).xdot

            x_new = rk4_step(f, state.pack(), t, dt)
            _check_state(x_new, t + dt, terrain)
            state = HromState.unpack(x_new)
            global_step += 1

        if record.node_times is not None:
            diff = _body12(state)[sfree] - record.X[-1]
            deviation = max(deviation, float(np.max(np.abs(diff))))
            record.plan_deviation = deviation
        records.append(record)
        if progress is not None:
            progress(record)

    # terminal sample at the episode end
    log.sample(schedule.t0 + schedule.duration, state, tracker, params, mask)

    result = EpisodeResult(
        scenario=scenario,
        scenario_hash=scenario_hash(scenario),
        log=log.build(),
        phases=records,
        final_state=state,
        backend_name=backend_name,
    )
    return result
