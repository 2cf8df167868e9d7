"""Shared fixtures and random-state helpers.

Random body states are "guarded": pitch stays well clear of the +-pi/2
Euler-rate singularity and leg joints stay inside a box where the leg length
is comfortably within its limits, so kinematic helpers never raise mid-test.
"""

import numpy as np
import pytest

from wairsim.dynamics.params import RobotParams
from wairsim.dynamics.state import HromState


@pytest.fixture(scope="session")
def params():
    return RobotParams()


def random_state(rng, pitch_max=1.2):
    """A random guarded HromState (all 24 body+leg coordinates populated)."""
    st = HromState()
    st.position = rng.uniform(-2.0, 2.0, 3)
    st.position[2] = rng.uniform(0.2, 1.5)
    st.euler = np.array(
        [
            rng.uniform(-np.pi, np.pi),
            rng.uniform(-pitch_max, pitch_max),
            rng.uniform(-np.pi, np.pi),
        ]
    )
    st.velocity = rng.uniform(-1.5, 1.5, 3)
    st.euler_rates = rng.uniform(-1.5, 1.5, 3)
    # pitch/roll limited so the leg stays away from its length stops
    st.leg_q = np.column_stack(
        [
            rng.uniform(-0.9, 0.9, 4),
            rng.uniform(-0.9, 0.9, 4),
            rng.uniform(0.20, 0.40, 4),
        ]
    )
    st.leg_rates = rng.uniform(-1.0, 1.0, (4, 3))
    return st


@pytest.fixture
def rng():
    return np.random.default_rng(0)
