"""Torso dynamics with pinned point feet via Lagrange multipliers.

The torso is the only inertia-carrying body; legs are massless kinematic
chains. Stance feet are pinned to world anchors, which couples into the
6-dimensional torso dynamics through the per-foot body-block Jacobian
``A_i = [I3, -R skew(c_i) E]``:

    [M6  -A^T] [vdot ]   [u - h]
    [A     0 ] [lambda] = [-b   ]

where ``b_i = kappa_i + R D_i chi_i`` carries the velocity-quadratic foot
acceleration bias plus the commanded stance-joint acceleration feed-forward
``chi`` (the gait plan drives the body through the pinned feet; thrust alone
cannot translate a doubly supported torso). With two distinct stance feet the
constraint block has the structural rank deficiency of a rigid two-point
weld (the "squeeze" force between the feet is indeterminate); the solver
returns the minimum-norm multiplier by projecting out that null direction
analytically instead of using an SVD.

Stance-leg joint rates in the returned state derivative are inverse-kinematic
outputs holding the feet on their anchors (with a velocity-level pull-back of
any position drift); stance-leg joint accelerations are recovered so the
full-chain constraint ``J vdot + Jdot v = 0`` holds to machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import SingularKKT
from ..spatial import (
    euler_rate_matrix,
    euler_rate_matrix_dot,
    euler_rate_matrix_partials,
    euler_to_rotation,
)
from .contacts import ContactSet, GroundReaction
from .kinematics import (
    body_block_jacobian,
    check_stance_pinning,
    contact_bias,
    foot_position,
    ik_leg_rates,
    leg_vector,
    leg_vector_jacobian,
)
from .params import RobotParams
from .state import NUM_LEGS, NV, ControlInput, HromState, ThrustWrench


@dataclass(frozen=True)
class MotionMask:
    """Active degrees of freedom; the sagittal mask freezes y, yaw, roll, gamma."""

    name: str
    body_idx: tuple[int, ...]
    foot_rows: tuple[int, ...]
    leg_idx: tuple[int, ...]


FULL_3D = MotionMask("3d", (0, 1, 2, 3, 4, 5), (0, 1, 2), (0, 1, 2))
SAGITTAL = MotionMask("sagittal", (0, 2, 4), (0, 2), (0, 2))
MASKS = {m.name: m for m in (FULL_3D, SAGITTAL)}


@dataclass
class ConstrainedAccel:
    """Result of one constrained dynamics evaluation."""

    body_accel: np.ndarray
    leg_accel: np.ndarray
    reaction: GroundReaction
    constraint_residual: float
    squeeze_residual: float


def body_mass_matrix(euler: np.ndarray, params: RobotParams) -> np.ndarray:
    """6x6 torso mass matrix over (v, euler_rates)."""
    E = euler_rate_matrix(euler)
    M = np.zeros((6, 6))
    M[0:3, 0:3] = params.mass * np.eye(3)
    M[3:6, 3:6] = E.T @ params.inertia @ E
    return M


def body_bias(euler: np.ndarray, euler_rates: np.ndarray, params: RobotParams) -> np.ndarray:
    """6-vector h(q, v): gravity plus velocity-quadratic rotational terms.

    Convention: M vdot + h = u, so the gravity entry is -m*g (positive z for
    a z-down gravity vector).
    """
    E = euler_rate_matrix(euler)
    Edot = euler_rate_matrix_dot(euler, euler_rates)
    I_B = params.inertia
    omega = E @ euler_rates
    partials = euler_rate_matrix_partials(euler)
    W = np.array([(partials[k] @ euler_rates) @ (I_B @ omega) for k in range(3)])
    h = np.zeros(6)
    h[0:3] = -params.mass * params.gravity
    h[3:6] = E.T @ I_B @ (Edot @ euler_rates) + Edot.T @ I_B @ omega - W
    return h


def mass_matrix(state: HromState, params: RobotParams) -> np.ndarray:
    """18x18 generalized mass matrix; massless-leg rows/columns are zero."""
    M = np.zeros((NV, NV))
    M[0:6, 0:6] = body_mass_matrix(state.euler, params)
    return M


def bias_vector(state: HromState, params: RobotParams) -> np.ndarray:
    """18-vector of gravity + velocity-product terms; leg entries are zero."""
    h = np.zeros(NV)
    h[0:6] = body_bias(state.euler, state.euler_rates, params)
    return h


def generalized_thrust(euler: np.ndarray, wrench: ThrustWrench) -> np.ndarray:
    """Map a body-frame COM wrench to (v, euler_rates) generalized forces."""
    R = euler_to_rotation(euler)
    E = euler_rate_matrix(euler)
    u = np.zeros(6)
    u[0:3] = R @ wrench.force
    u[3:6] = E.T @ wrench.moment
    return u


def _min_norm_contact_solve(
    G: np.ndarray, rhs: np.ndarray, squeeze_dir: np.ndarray | None
) -> np.ndarray:
    """Solve G lam = rhs for the minimum-norm lam.

    ``squeeze_dir`` is the known structural null direction of G for a
    two-foot stance (internal squeeze force); projecting it out makes the
    regularized system positive definite without an SVD.
    """
    if squeeze_dir is None:
        try:
            c = np.linalg.cholesky(G)
        except np.linalg.LinAlgError as exc:
            raise SingularKKT("contact Schur complement not positive definite") from exc
        return np.linalg.solve(c.T, np.linalg.solve(c, rhs))
    s = squeeze_dir
    rhs_proj = rhs - s * (s @ rhs)
    try:
        c = np.linalg.cholesky(G + np.outer(s, s))
    except np.linalg.LinAlgError as exc:
        raise SingularKKT("contact Schur complement rank-deficient beyond squeeze") from exc
    return np.linalg.solve(c.T, np.linalg.solve(c, rhs_proj))


def constrained_accel(
    state: HromState,
    params: RobotParams,
    contacts: ContactSet,
    wrench: ThrustWrench | None = None,
    leg_accel_cmd: np.ndarray | None = None,
    mask: MotionMask = FULL_3D,
    check: bool = True,
) -> ConstrainedAccel:
    """Constrained body acceleration, contact forces, and recovered leg accelerations.

    ``leg_accel_cmd`` rows are the commanded stance-joint accelerations
    (ignored for swing legs); zero means coasting on the current rates.
    """
    wrench = wrench or ThrustWrench.zero()
    if check:
        for leg in contacts.stance_indices:
            check_stance_pinning(state, params, leg, contacts.anchors[leg])

    R = euler_to_rotation(state.euler)
    E = euler_rate_matrix(state.euler)
    idx = list(mask.body_idx)
    M6 = body_mass_matrix(state.euler, params)
    h6 = body_bias(state.euler, state.euler_rates, params)
    u6 = generalized_thrust(state.euler, wrench)
    M_red = M6[np.ix_(idx, idx)]
    rhs1 = (u6 - h6)[idx]

    stance = list(contacts.stance_indices)
    n_c = len(stance)
    lam_world = np.zeros((NUM_LEGS, 3))
    vdot6 = np.zeros(6)
    squeeze_residual = 0.0

    if n_c == 0:
        vdot6[idx] = np.linalg.solve(M_red, rhs1)
    else:
        rows = list(mask.foot_rows)
        n_r = len(rows)
        A_list, b_list, feet = [], [], []
        for leg in stance:
            c = params.hip_offsets[leg] + leg_vector(state.leg_q[leg])
            A_full = body_block_jacobian(R, E, c)
            b_full = contact_bias(state, params, leg)
            if leg_accel_cmd is not None:
                b_full = b_full + R @ leg_vector_jacobian(state.leg_q[leg]) @ leg_accel_cmd[leg]
            A_list.append(A_full[np.ix_(rows, idx)])
            b_list.append(b_full[rows])
            feet.append(state.position + R @ c)
        A_red = np.vstack(A_list)
        b_red = np.concatenate(b_list)

        Minv_rhs1 = np.linalg.solve(M_red, rhs1)
        Minv_AT = np.linalg.solve(M_red, A_red.T)
        G = A_red @ Minv_AT
        rhs2 = -b_red - A_red @ Minv_rhs1

        if n_c == 1:
            lam_red = _min_norm_contact_solve(G, rhs2, None)
        elif n_c == 2:
            d = (feet[0] - feet[1])[rows]
            nrm = np.linalg.norm(d)
            if nrm < 1e-9:
                raise SingularKKT("stance feet coincide in the active plane")
            s = np.concatenate([d, -d]) / (np.sqrt(2.0) * nrm)
            lam_red = _min_norm_contact_solve(G, rhs2, s)
        else:
            lam_red, *_ = np.linalg.lstsq(G, rhs2, rcond=None)
        vdot6[idx] = Minv_rhs1 + Minv_AT @ lam_red
        squeeze_residual = float(np.max(np.abs(A_red @ vdot6[idx] + b_red)))
        for k, leg in enumerate(stance):
            lam_world[leg, rows] = lam_red[k * n_r : (k + 1) * n_r]

    # Recover stance-joint accelerations that close the full-chain constraint
    # exactly: R D qdd = -(A vdot + kappa).
    leg_acc = np.zeros((NUM_LEGS, 3))
    constraint_residual = 0.0
    wrench_gen = np.zeros(6)
    for leg in stance:
        c = params.hip_offsets[leg] + leg_vector(state.leg_q[leg])
        A_full = body_block_jacobian(R, E, c)
        kappa = contact_bias(state, params, leg)
        D = leg_vector_jacobian(state.leg_q[leg])
        qdd = np.linalg.solve(D, R.T @ (-A_full @ vdot6 - kappa))
        leg_acc[leg] = qdd
        wrench_gen += A_full.T @ lam_world[leg]
        res = A_full @ vdot6 + R @ D @ qdd + kappa
        constraint_residual = max(constraint_residual, float(np.max(np.abs(res))))

    reaction = GroundReaction(forces=lam_world, wrench=wrench_gen)
    return ConstrainedAccel(
        body_accel=vdot6,
        leg_accel=leg_acc,
        reaction=reaction,
        constraint_residual=constraint_residual,
        squeeze_residual=squeeze_residual,
    )


@dataclass
class StateDerivative:
    """Time derivative of the packed 24-dim state plus force diagnostics."""

    xdot: np.ndarray
    leg_rates: np.ndarray
    leg_accel: np.ndarray
    reaction: GroundReaction
    constraint_residual: float
    squeeze_residual: float


def state_derivative(
    state: HromState,
    params: RobotParams,
    contacts: ContactSet,
    control: ControlInput | None = None,
    mask: MotionMask = FULL_3D,
    check: bool = False,
) -> StateDerivative:
    """Full state derivative under the active contact set.

    Stance legs: joint rates are the inverse-kinematic rates pinning the foot
    (plus drift pull-back), not the commanded ones. Swing legs follow the
    commanded ``control.leg_rates``.
    """
    control = control or ControlInput()
    acc = constrained_accel(
        state,
        params,
        contacts,
        control.wrench,
        leg_accel_cmd=control.leg_accel,
        mask=mask,
        check=check,
    )
    leg_rates = np.array(control.leg_rates, dtype=float, copy=True)
    gain = params.stabilization_gain
    for leg in contacts.stance_indices:
        err = foot_position(state, params, leg) - contacts.anchors[leg]
        leg_rates[leg] = ik_leg_rates(state, params, leg, position_error=err, gain=gain)
    if mask is not FULL_3D:
        frozen = [k for k in range(3) if k not in mask.leg_idx]
        leg_rates[:, frozen] = 0.0
    xdot = np.concatenate(
        [
            state.velocity,
            state.euler_rates,
            acc.body_accel[0:3],
            acc.body_accel[3:6],
            leg_rates.ravel(),
        ]
    )
    return StateDerivative(
        xdot=xdot,
        leg_rates=leg_rates,
        leg_accel=acc.leg_accel,
        reaction=acc.reaction,
        constraint_residual=acc.constraint_residual,
        squeeze_residual=acc.squeeze_residual,
    )


def kinetic_energy(state: HromState, params: RobotParams) -> float:
    E = euler_rate_matrix(state.euler)
    omega = E @ state.euler_rates
    return float(
        0.5 * params.mass * state.velocity @ state.velocity
        + 0.5 * omega @ params.inertia @ omega
    )


def potential_energy(state: HromState, params: RobotParams) -> float:
    return float(-params.mass * params.gravity @ state.position)


def total_energy(state: HromState, params: RobotParams) -> float:
    return kinetic_energy(state, params) + potential_energy(state, params)


def rk4_step(f, x: np.ndarray, t: float, dt: float) -> np.ndarray:
    """Classic fixed-step RK4 for xdot = f(x, t)."""
    k1 = f(x, t)
    k2 = f(x + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = f(x + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = f(x + dt * k3, t + dt)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
