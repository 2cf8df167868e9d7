"""Rotation kinematics checks.

Oracles: rotation-matrix group properties, and the defining relation
skew(omega_body) = R^T dR/dt evaluated by central differences on R along
random Euler trajectories. Nothing here reuses the implementation's own
formulas beyond euler_to_rotation itself.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wairsim.errors import GimbalProximity
from wairsim.spatial import (
    body_angular_velocity,
    euler_rate_matrix,
    euler_rate_matrix_dot,
    euler_rate_matrix_partials,
    euler_to_rotation,
    is_rotation,
    rot_x,
    rot_y,
    rot_z,
    skew,
)

ANGLE = st.floats(-np.pi, np.pi, allow_nan=False)
PITCH = st.floats(-1.4, 1.4, allow_nan=False)


def test_skew_matches_cross_product(rng):
    for _ in range(20):
        v, w = rng.standard_normal(3), rng.standard_normal(3)
        assert np.allclose(skew(v) @ w, np.cross(v, w), atol=1e-15)


def test_elementary_rotations_orthonormal(rng):
    for make in (rot_x, rot_y, rot_z):
        a = rng.uniform(-np.pi, np.pi)
        R = make(a)
        assert np.allclose(R @ R.T, np.eye(3), atol=1e-15)
        assert np.isclose(np.linalg.det(R), 1.0, atol=1e-15)


@given(yaw=ANGLE, pitch=PITCH, roll=ANGLE)
@settings(max_examples=200, deadline=None)
def test_euler_to_rotation_is_rotation(yaw, pitch, roll):
    R = euler_to_rotation(np.array([yaw, pitch, roll]))
    assert is_rotation(R)
    # composition order: yaw about world z first
    assert np.allclose(R, rot_z(yaw) @ rot_y(pitch) @ rot_x(roll), atol=1e-14)


def test_yaw_only_moves_x_to_heading():
    R = euler_to_rotation(np.array([np.pi / 2, 0.0, 0.0]))
    assert np.allclose(R @ [1, 0, 0], [0, 1, 0], atol=1e-15)


def test_euler_rate_matrix_against_rotation_derivative(rng):
    # omega_hat = R^T dR/dt with dR/dt from central differences on the
    # composed rotation along a random smooth Euler path.
    h = 1e-6
    for _ in range(50):
        ang = np.array([rng.uniform(-3, 3), rng.uniform(-1.3, 1.3), rng.uniform(-3, 3)])
        rates = rng.uniform(-2, 2, 3)
        Rp = euler_to_rotation(ang + h * rates)
        Rm = euler_to_rotation(ang - h * rates)
        omega_hat = euler_to_rotation(ang).T @ ((Rp - Rm) / (2 * h))
        omega_fd = np.array([omega_hat[2, 1], omega_hat[0, 2], omega_hat[1, 0]])
        omega = euler_rate_matrix(ang) @ rates
        assert np.allclose(omega, omega_fd, atol=1e-7)
        assert np.allclose(body_angular_velocity(ang, rates), omega, atol=1e-14)


def test_euler_rate_matrix_partials_match_fd(rng):
    h = 1e-6
    for _ in range(25):
        ang = np.array([rng.uniform(-3, 3), rng.uniform(-1.3, 1.3), rng.uniform(-3, 3)])
        parts = euler_rate_matrix_partials(ang)
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            fd = (euler_rate_matrix(ang + e) - euler_rate_matrix(ang - e)) / (2 * h)
            assert np.allclose(parts[k], fd, atol=1e-8)


def test_euler_rate_matrix_dot_is_chain_rule(rng):
    h = 1e-6
    for _ in range(25):
        ang = np.array([rng.uniform(-3, 3), rng.uniform(-1.3, 1.3), rng.uniform(-3, 3)])
        rates = rng.uniform(-2, 2, 3)
        Ed = euler_rate_matrix_dot(ang, rates)
        fd = (euler_rate_matrix(ang + h * rates) - euler_rate_matrix(ang - h * rates)) / (2 * h)
        assert np.allclose(Ed, fd, atol=1e-7)


@pytest.mark.parametrize("pitch", [np.pi / 2, -np.pi / 2, np.pi / 2 - 1e-9])
def test_gimbal_proximity_raises(pitch):
    with pytest.raises(GimbalProximity):
        euler_rate_matrix(np.array([0.1, pitch, -0.2]))


def test_rate_matrix_invertible_away_from_gimbal(rng):
    for _ in range(20):
        ang = np.array([rng.uniform(-3, 3), rng.uniform(-1.4, 1.4), rng.uniform(-3, 3)])
        E = euler_rate_matrix(ang)
        assert np.linalg.cond(E) < 1e3
