"""Rotations and Euler-rate maps for the Z-Y-X (yaw-pitch-roll) convention.

Euler angles are ordered ``(yaw, pitch, roll)`` and the body rotation is
``R = Rz(yaw) @ Ry(pitch) @ Rx(roll)``. World frame is z-up; all angles in
radians. Body angular velocity relates to Euler rates via
``omega_body = E(angles) @ angle_rates``.
"""

from __future__ import annotations

import numpy as np

from .errors import GimbalProximity

GIMBAL_MARGIN = 1e-6


def rot_x(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def skew(v: np.ndarray) -> np.ndarray:
    """Cross-product matrix: skew(v) @ w == cross(v, w)."""
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def euler_to_rotation(angles: np.ndarray) -> np.ndarray:
    """Rotation matrix of Z-Y-X Euler angles (yaw, pitch, roll)."""
    yaw, pitch, roll = angles
    return rot_z(yaw) @ rot_y(pitch) @ rot_x(roll)


def check_pitch(pitch: float) -> None:
    if abs(abs(pitch) - np.pi / 2.0) < GIMBAL_MARGIN or abs(pitch) > np.pi / 2.0:
        raise GimbalProximity(f"pitch {pitch!r} within {GIMBAL_MARGIN} of +-pi/2")


def euler_rate_matrix(angles: np.ndarray) -> np.ndarray:
    """E such that omega_body = E(angles) @ (yaw_dot, pitch_dot, roll_dot).

    Derived from skew(omega) = R^T dR/dt for the Z-Y-X composition.
    Raises GimbalProximity near pitch = +-pi/2 where E loses rank.
    """
    yaw, pitch, roll = angles
    check_pitch(pitch)
    ct, st = np.cos(pitch), np.sin(pitch)
    cr, sr = np.cos(roll), np.sin(roll)
    return np.array(
        [
            [-st, 0.0, 1.0],
            [ct * sr, cr, 0.0],
            [ct * cr, -sr, 0.0],
        ]
    )


def euler_rate_matrix_partials(angles: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Partial derivatives (dE/dyaw, dE/dpitch, dE/droll); dE/dyaw is zero."""
    _, pitch, roll = angles
    ct, st = np.cos(pitch), np.sin(pitch)
    cr, sr = np.cos(roll), np.sin(roll)
    d_pitch = np.array(
        [
            [-ct, 0.0, 0.0],
            [-st * sr, 0.0, 0.0],
            [-st * cr, 0.0, 0.0],
        ]
    )
    d_roll = np.array(
        [
            [0.0, 0.0, 0.0],
            [ct * cr, -sr, 0.0],
            [-ct * sr, -cr, 0.0],
        ]
    )
    return np.zeros((3, 3)), d_pitch, d_roll


def euler_rate_matrix_dot(angles: np.ndarray, rates: np.ndarray) -> np.ndarray:
    """Time derivative of E along Euler rates."""
    d_yaw, d_pitch, d_roll = euler_rate_matrix_partials(angles)
    return d_yaw * rates[0] + d_pitch * rates[1] + d_roll * rates[2]


def body_angular_velocity(angles: np.ndarray, rates: np.ndarray) -> np.ndarray:
    return euler_rate_matrix(angles) @ rates


def is_rotation(R: np.ndarray, tol: float = 1e-9) -> bool:
    return (
        R.shape == (3, 3)
        and np.allclose(R.T @ R, np.eye(3), atol=tol)
        and abs(np.linalg.det(R) - 1.0) < tol
    )
