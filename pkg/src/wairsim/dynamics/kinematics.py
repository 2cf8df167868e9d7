"""Leg kinematics: foot placement, Jacobians, inverse kinematics.

Each leg is a massless 3-DOF chain from a body-fixed hip: hip pitch ``phi``
about the body y axis, hip roll ``gamma`` about the rotated x axis, and a
prismatic extension ``l``. The body-frame hip-to-foot vector is

    l_f(phi, gamma, l) = Ry(phi) @ Rx(gamma) @ (0, 0, -l)
                       = (-l*cos(gamma)*sin(phi), l*sin(gamma), -l*cos(gamma)*cos(phi))

so at zero joint angles the leg hangs straight down.
"""

from __future__ import annotations

import numpy as np

from ..errors import PreconditionDrift, UnreachableFoothold
from ..spatial import (
    euler_rate_matrix,
    euler_rate_matrix_dot,
    euler_to_rotation,
    skew,
)
from .params import RobotParams
from .state import NV, HromState

_JOINT_SINGULARITY_MARGIN = 1e-6


def leg_vector(leg_q: np.ndarray) -> np.ndarray:
    """Body-frame vector from hip to foot."""
    phi, gamma, length = leg_q
    cg, sg = np.cos(gamma), np.sin(gamma)
    cp, sp = np.cos(phi), np.sin(phi)
    return np.array([-length * cg * sp, length * sg, -length * cg * cp])


def leg_vector_jacobian(leg_q: np.ndarray) -> np.ndarray:
    """D = d(leg_vector)/d(phi, gamma, l), columns in joint order."""
    phi, gamma, length = leg_q
    cg, sg = np.cos(gamma), np.sin(gamma)
    cp, sp = np.cos(phi), np.sin(phi)
    return np.array(
        [
            [-length * cg * cp, length * sg * sp, -cg * sp],
            [0.0, length * cg, sg],
            [length * cg * sp, length * sg * cp, -cg * cp],
        ]
    )


def leg_vector_jacobian_dot(leg_q: np.ndarray, leg_rates: np.ndarray) -> np.ndarray:
    """Time derivative of D along joint rates."""
    phi, gamma, length = leg_q
    dphi, dgamma, dlength = leg_rates
    cg, sg = np.cos(gamma), np.sin(gamma)
    cp, sp = np.cos(phi), np.sin(phi)
    d_phi = np.array(
        [
            [length * cg * sp, length * sg * cp, -cg * cp],
            [0.0, 0.0, 0.0],
            [length * cg * cp, -length * sg * sp, cg * sp],
        ]
    )
    d_gamma = np.array(
        [
            [length * sg * cp, length * cg * sp, sg * sp],
            [0.0, -length * sg, cg],
            [-length * sg * sp, length * cg * cp, sg * cp],
        ]
    )
    d_length = np.array(
        [
            [-cg * cp, sg * sp, 0.0],
            [0.0, cg, 0.0],
            [cg * sp, sg * cp, 0.0],
        ]
    )
    return d_phi * dphi + d_gamma * dgamma + d_length * dlength


def hip_position(state: HromState, params: RobotParams, leg: int) -> np.ndarray:
    R = euler_to_rotation(state.euler)
    return state.position + R @ params.hip_offsets[leg]


def foot_position(state: HromState, params: RobotParams, leg: int) -> np.ndarray:
    R = euler_to_rotation(state.euler)
    c = params.hip_offsets[leg] + leg_vector(state.leg_q[leg])
    return state.position + R @ c


def thruster_position(state: HromState, params: RobotParams, unit: int) -> np.ndarray:
    R = euler_to_rotation(state.euler)
    return state.position + R @ params.thruster_offsets[unit]


def body_block_jacobian(R: np.ndarray, E: np.ndarray, c_body: np.ndarray) -> np.ndarray:
    """Foot velocity sensitivity to (v, euler_rates): [I3, -R skew(c) E]."""
    A = np.zeros((3, 6))
    A[:, 0:3] = np.eye(3)
    A[:, 3:6] = -R @ skew(c_body) @ E
    return A


def foot_jacobian(state: HromState, params: RobotParams, leg: int) -> np.ndarray:
    """Full-chain foot Jacobian, 3 x 18 over [v, euler_rates, leg_rates].

    Columns for other legs are zero; this leg's block is R @ D.
    """
    R = euler_to_rotation(state.euler)
    E = euler_rate_matrix(state.euler)
    c = params.hip_offsets[leg] + leg_vector(state.leg_q[leg])
    J = np.zeros((3, NV))
    J[:, 0:6] = body_block_jacobian(R, E, c)
    J[:, 6 + 3 * leg : 9 + 3 * leg] = R @ leg_vector_jacobian(state.leg_q[leg])
    return J


def foot_velocity(state: HromState, params: RobotParams, leg: int) -> np.ndarray:
    R = euler_to_rotation(state.euler)
    E = euler_rate_matrix(state.euler)
    c = params.hip_offsets[leg] + leg_vector(state.leg_q[leg])
    A = body_block_jacobian(R, E, c)
    v_body = np.concatenate([state.velocity, state.euler_rates])
    return A @ v_body + R @ leg_vector_jacobian(state.leg_q[leg]) @ state.leg_rates[leg]


def contact_bias(state: HromState, params: RobotParams, leg: int) -> np.ndarray:
    """Quadratic-velocity part of the foot acceleration (all accelerations zero).

    This is the Jdot @ v term of the pinning constraint along the full chain,
    using the state's stored leg rates.
    """
    R = euler_to_rotation(state.euler)
    E = euler_rate_matrix(state.euler)
    Edot = euler_rate_matrix_dot(state.euler, state.euler_rates)
    omega = E @ state.euler_rates
    omega_dot_bias = Edot @ state.euler_rates
    q = state.leg_q[leg]
    dq = state.leg_rates[leg]
    c = params.hip_offsets[leg] + leg_vector(q)
    c_dot = leg_vector_jacobian(q) @ dq
    inner = (
        np.cross(omega, np.cross(omega, c))
        + np.cross(omega_dot_bias, c)
        + 2.0 * np.cross(omega, c_dot)
        + leg_vector_jacobian_dot(q, dq) @ dq
    )
    return R @ inner


def leg_ik(
    body_position: np.ndarray,
    R: np.ndarray,
    hip_offset: np.ndarray,
    target: np.ndarray,
    length_limits: tuple[float, float] | None = None,
) -> np.ndarray:
    """Joint coordinates placing the foot at a world-frame target.

    Raises UnreachableFoothold outside the length limits or too close to the
    gamma = +-pi/2 singularity.
    """
    r = R.T @ (target - body_position) - hip_offset
    length = float(np.linalg.norm(r))
    if length < 1e-12:
        raise UnreachableFoothold("foot target coincides with hip")
    if length_limits is not None:
        lo, hi = length_limits
        if not (lo - 1e-9 <= length <= hi + 1e-9):
            raise UnreachableFoothold(
                f"required leg length {length:.4f} outside [{lo}, {hi}]"
            )
    sin_gamma = np.clip(r[1] / length, -1.0, 1.0)
    gamma = float(np.arcsin(sin_gamma))
    if abs(gamma) > np.pi / 2.0 - _JOINT_SINGULARITY_MARGIN:
        raise UnreachableFoothold("abduction angle at fold-over singularity")
    phi = float(np.arctan2(-r[0], -r[2]))
    return np.array([phi, gamma, length])


def ik_leg_rates(
    state: HromState,
    params: RobotParams,
    leg: int,
    target_velocity: np.ndarray | None = None,
    position_error: np.ndarray | None = None,
    gain: float = 0.0,
) -> np.ndarray:
    """Joint rates making the foot track a target velocity given the body twist.

    With no target and zero gain this returns the rates that hold the foot
    stationary under the current body motion. ``gain`` pulls a drifted foot
    back along ``position_error`` (foot minus anchor).
    """
    R = euler_to_rotation(state.euler)
    E = euler_rate_matrix(state.euler)
    q = state.leg_q[leg]
    c = params.hip_offsets[leg] + leg_vector(q)
    A = body_block_jacobian(R, E, c)
    v_body = np.concatenate([state.velocity, state.euler_rates])
    rhs = -A @ v_body
    if target_velocity is not None:
        rhs = rhs + target_velocity
    if gain > 0.0 and position_error is not None:
        rhs = rhs - gain * position_error
    D = leg_vector_jacobian(q)
    return np.linalg.solve(D, R.T @ rhs)


def check_stance_pinning(
    state: HromState,
    params: RobotParams,
    leg: int,
    anchor: np.ndarray,
    pos_tol: float = 1e-6,
    vel_tol: float = 1e-6,
) -> None:
    """Raise PreconditionDrift if a stance foot strays from its anchor."""
    err = foot_position(state, params, leg) - anchor
    if np.linalg.norm(err) > pos_tol:
        raise PreconditionDrift(
            f"stance foot {leg} is {np.linalg.norm(err):.2e} m from its anchor"
        )
    vel = foot_velocity(state, params, leg)
    if np.linalg.norm(vel) > vel_tol:
        raise PreconditionDrift(
            f"stance foot {leg} has residual velocity {np.linalg.norm(vel):.2e} m/s"
        )
