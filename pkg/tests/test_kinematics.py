"""Leg kinematics against finite-difference oracles.

The Jacobian oracle perturbs the 18 generalized coordinates directly
(positions through the Euler-rate map, since foot_jacobian's angular columns
are expressed in euler_rates). The bias oracle differentiates the foot
VELOCITY along the actual flow, which needs no acceleration-level code at all:
d/dt (J v) at constant acceleration zero equals Jdot v.
"""

import numpy as np
import pytest

from conftest import random_state
from wairsim.dynamics.kinematics import (
    check_stance_pinning,
    contact_bias,
    foot_jacobian,
    foot_position,
    foot_velocity,
    hip_position,
    ik_leg_rates,
    leg_ik,
    leg_vector,
)
from wairsim.errors import PreconditionDrift, UnreachableFoothold


def _advance(state, dt):
    """Flow the kinematic state forward: positions by their stored rates."""
    nxt = state.copy()
    nxt.position = state.position + dt * state.velocity
    nxt.euler = state.euler + dt * state.euler_rates
    nxt.leg_q = state.leg_q + dt * state.leg_rates
    return nxt


def test_foot_position_components(params):
    st = random_state(np.random.default_rng(3))
    for leg in range(4):
        hip = hip_position(st, params, leg)
        # hip sits at the body-frame offset; foot adds the rotated leg vector
        from wairsim.spatial import euler_to_rotation

        R = euler_to_rotation(st.euler)
        assert np.allclose(hip, st.position + R @ params.hip_offsets[leg], atol=1e-14)
        foot = foot_position(st, params, leg)
        assert np.allclose(foot, hip + R @ leg_vector(st.leg_q[leg]), atol=1e-14)


def test_foot_jacobian_matches_fd(params):
    rng = np.random.default_rng(11)
    h = 1e-6
    for _ in range(40):
        st = random_state(rng)
        leg = rng.integers(4)
        J = foot_jacobian(st, params, leg)
        for k in range(18):
            dq = np.zeros(18)
            dq[k] = 1.0
            plus, minus = st.copy(), st.copy()
            plus.position = st.position + h * dq[0:3]
            plus.euler = st.euler + h * dq[3:6]
            plus.leg_q = st.leg_q + h * dq[6:18].reshape(4, 3)
            minus.position = st.position - h * dq[0:3]
            minus.euler = st.euler - h * dq[3:6]
            minus.leg_q = st.leg_q - h * dq[6:18].reshape(4, 3)
            fd = (foot_position(plus, params, leg) - foot_position(minus, params, leg)) / (2 * h)
            scale = max(1.0, np.abs(fd).max())
            assert np.allclose(J[:, k], fd, atol=1e-5 * scale), f"column {k}"


def test_foot_velocity_is_jacobian_times_rates(params):
    rng = np.random.default_rng(4)
    for _ in range(20):
        st = random_state(rng)
        for leg in range(4):
            v = np.concatenate([st.velocity, st.euler_rates, st.leg_rates.ravel()])
            assert np.allclose(
                foot_velocity(st, params, leg), foot_jacobian(st, params, leg) @ v, atol=1e-12
            )


def test_contact_bias_matches_fd_of_velocity(params):
    rng = np.random.default_rng(7)
    h = 1e-6
    for _ in range(40):
        st = random_state(rng)
        leg = rng.integers(4)
        fd = (
            foot_velocity(_advance(st, h), params, leg)
            - foot_velocity(_advance(st, -h), params, leg)
        ) / (2 * h)
        bias = contact_bias(st, params, leg)
        scale = max(1.0, np.abs(fd).max())
        assert np.allclose(bias, fd, atol=2e-5 * scale)


def test_leg_ik_round_trip(params):
    rng = np.random.default_rng(19)
    from wairsim.spatial import euler_to_rotation

    for _ in range(50):
        st = random_state(rng)
        R = euler_to_rotation(st.euler)
        for leg in range(4):
            target = foot_position(st, params, leg)
            q = leg_ik(st.position, R, params.hip_offsets[leg], target,
                       (params.leg_length_min, params.leg_length_max))
            assert np.allclose(q, st.leg_q[leg], atol=1e-12)


def test_leg_ik_rejects_out_of_range():
    from wairsim.spatial import euler_to_rotation

    R = euler_to_rotation(np.zeros(3))
    hip = np.array([0.22, -0.11, -0.05])
    body = np.array([0.0, 0.0, 0.34])
    with pytest.raises(UnreachableFoothold):
        leg_ik(body, R, hip, np.array([0.22, -0.11, -2.0]), (0.15, 0.45))
    with pytest.raises(UnreachableFoothold):
        leg_ik(body, R, hip, body + hip + np.array([0.0, 0.0, -0.05]), (0.15, 0.45))


def test_ik_leg_rates_pins_the_foot(params):
    # With rates from ik_leg_rates, the stance foot's world velocity vanishes.
    rng = np.random.default_rng(23)
    for _ in range(30):
        st = random_state(rng)
        for leg in range(4):
            st.leg_rates[leg] = ik_leg_rates(st, params, leg)
            assert np.allclose(foot_velocity(st, params, leg), 0.0, atol=1e-12)


def test_ik_leg_rates_tracks_target_velocity(params):
    rng = np.random.default_rng(29)
    st = random_state(rng)
    want = rng.uniform(-1, 1, 3)
    st.leg_rates[2] = ik_leg_rates(st, params, 2, target_velocity=want)
    assert np.allclose(foot_velocity(st, params, 2), want, atol=1e-12)


def test_ik_leg_rates_position_feedback_direction(params):
    # The feedback term drives the foot opposite the position error.
    st = random_state(np.random.default_rng(31))
    err = np.array([0.01, -0.02, 0.005])
    st.leg_rates[1] = ik_leg_rates(st, params, 1, position_error=err, gain=50.0)
    assert np.allclose(foot_velocity(st, params, 1), -50.0 * err, atol=1e-12)


def test_check_stance_pinning_raises_on_drift(params):
    st = random_state(np.random.default_rng(37))
    anchor = foot_position(st, params, 0)
    st.leg_rates[0] = ik_leg_rates(st, params, 0)
    check_stance_pinning(st, params, 0, anchor)  # exact: no raise
    with pytest.raises(PreconditionDrift):
        check_stance_pinning(st, params, 0, anchor + np.array([0.0, 0.0, 1e-3]))
