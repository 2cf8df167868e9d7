"""Gait planning: terrain, reference path, schedule, footholds, swing."""

from .footholds import FootholdLattice, check_reachable, select_foothold
from .plan import GaitPlan, PhasePlan
from .reference import ReferenceTrajectory
from .schedule import GaitSchedule
from .swing import SwingCurve, de_casteljau, make_swing
from .terrain import TerrainProfile, TerrainSegment

__all__ = [
    "FootholdLattice",
    "check_reachable",
    "select_foothold",
    "GaitPlan",
    "PhasePlan",
    "ReferenceTrajectory",
    "GaitSchedule",
    "SwingCurve",
    "de_casteljau",
    "make_swing",
    "TerrainProfile",
    "TerrainSegment",
]
