"""wairsim: thruster-assisted quadruped locomotion on inclines.

A reduced-order quadruped (rigid torso, four massless 3-DOF legs, a thruster
wrench at the COM) walks slopes steeper than friction alone allows. Contact
forces come from a Lagrange-multiplier formulation; per-gait-phase thrust
profiles are found by Hermite-Simpson direct collocation with friction-cone
constraints, solved by a built-in augmented-Lagrangian method.
"""

__version__ = "0.1.0"

from . import dynamics, gait, spatial  # noqa: F401
from .errors import (  # noqa: F401
    GimbalProximity,
    GridMisaligned,
    IntegrationDiverged,
    PhaseSolveFailed,
    PreconditionDrift,
    ScenarioError,
    SingularKKT,
    UnreachableFoothold,
    WairsimError,
)


def backend_name() -> str:
    """Name of the numeric backend selected at import ('compiled' or 'python')."""
    from .fastpath import BACKEND_NAME

    return BACKEND_NAME
