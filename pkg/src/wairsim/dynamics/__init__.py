"""Reduced-order quadruped dynamics: torso inertia, massless 3-DOF legs."""

from .contacts import ContactSet, GroundReaction
from .kinematics import (
    foot_jacobian,
    foot_position,
    foot_velocity,
    hip_position,
    ik_leg_rates,
    leg_ik,
    thruster_position,
)
from .model import (
    FULL_3D,
    MASKS,
    SAGITTAL,
    ConstrainedAccel,
    MotionMask,
    StateDerivative,
    bias_vector,
    body_bias,
    body_mass_matrix,
    constrained_accel,
    kinetic_energy,
    mass_matrix,
    potential_energy,
    rk4_step,
    state_derivative,
    total_energy,
)
from .params import DIAGONAL_PAIRS, LEG_NAMES, RobotParams
from .state import (
    NUM_LEGS,
    NV,
    NX,
    ControlInput,
    HromState,
    LegState,
    ThrustWrench,
    leg_index,
)

__all__ = [
    "ContactSet",
    "GroundReaction",
    "foot_jacobian",
    "foot_position",
    "foot_velocity",
    "hip_position",
    "ik_leg_rates",
    "leg_ik",
    "thruster_position",
    "FULL_3D",
    "MASKS",
    "SAGITTAL",
    "ConstrainedAccel",
    "MotionMask",
    "StateDerivative",
    "bias_vector",
    "body_bias",
    "body_mass_matrix",
    "constrained_accel",
    "kinetic_energy",
    "mass_matrix",
    "potential_energy",
    "rk4_step",
    "state_derivative",
    "total_energy",
    "DIAGONAL_PAIRS",
    "LEG_NAMES",
    "RobotParams",
    "NUM_LEGS",
    "NV",
    "NX",
    "ControlInput",
    "HromState",
    "LegState",
    "ThrustWrench",
    "leg_index",
]
