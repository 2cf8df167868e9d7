"""Scenario files: one YAML document pins down an entire episode.

Everything that affects the produced trajectory lives in the scenario --
terrain, gait timing, reference speed, robot parameters, transcription and
solver settings, the integration step, the seed.  The resolved configuration
(defaults merged in) is hashed, so two runs with the same hash are byte
comparable and a changed default shows up as a changed hash.  Wall-clock and
host data never enter the hash or the artifacts.
"""

from __future__ import annotations

import copy
import hashlib
import importlib.resources
import json
import os
from dataclasses import dataclass, field, fields

import numpy as np
import yaml

from ..collocation.problem import TranscriptionOptions
from ..dynamics.params import RobotParams
from ..errors import ScenarioError
from ..gait.footholds import FootholdLattice
from ..gait.plan import GaitPlan
from ..gait.reference import ReferenceTrajectory
from ..gait.schedule import GaitSchedule
from ..gait.terrain import TerrainProfile, TerrainSegment
from ..nlp.auglag import SolverOptions

SCHEMA_VERSION = 1

# Slope angles appear in scenario files in degrees; everything downstream is
# radians.
_TERRAIN_KEYS = {"start_x", "slope_deg", "friction"}

_GAIT_DEFAULTS = {
    "phase_duration": 0.5,
    "num_phases": 12,
    "mode": "trot",
    "first_pair": 0,
    "stand_legs": [0, 3],
}
_REFERENCE_DEFAULTS = {
    "start_x": 0.0,
    "speed": 0.375,
    "body_height": 0.32,
    "blend_time": 0.3,
}
_SIM_DEFAULTS = {
    "dt": 1.0e-3,
    "log_hz": 100.0,
    "clearance": 0.05,
    "lattice_spacing": 0.1,
    "guess_jitter": 1.0e-6,
    # stance-leg joint servo around the planned joint trajectory; the pinned
    # two-foot closure is an inverted pendulum, so pure acceleration
    # feed-forward diverges within a few phases
    "stance_kp": 100.0,
    "stance_kd": 20.0,
}

# Options forwarded verbatim to TranscriptionOptions / SolverOptions; the
# scenario only stores what differs from the dataclass defaults.
_SOLVER_BLOCKED = {"log_path", "verbose"}


def _transcription_fields() -> set[str]:
    return {f.name for f in fields(TranscriptionOptions)}


def _solver_fields() -> set[str]:
    return {f.name for f in fields(SolverOptions)} - _SOLVER_BLOCKED


@dataclass
class Scenario:
    """Resolved episode configuration (plain python types only)."""

    name: str
    seed: int = 0
    thrust: bool = True
    terrain: list = field(
        default_factory=lambda: [{"start_x": -3.0, "slope_deg": 30.0, "friction": 0.35}]
    )
    gait: dict = field(default_factory=dict)
    reference: dict = field(default_factory=dict)
    robot: dict = field(default_factory=dict)
    transcription: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)
    sim: dict = field(default_factory=dict)
    version: int = SCHEMA_VERSION

    def __post_init__(self) -> None:
        self.gait = {**_GAIT_DEFAULTS, **self.gait}
        self.reference = {**_REFERENCE_DEFAULTS, **self.reference}
        self.sim = {**_SIM_DEFAULTS, **self.sim}
        self.validate()

    # ------------------------------------------------------------------
    # validation / identity

    def validate(self) -> None:
        if self.version != SCHEMA_VERSION:
            raise ScenarioError(
                f"scenario schema version {self.version} not supported "
                f"(this build reads version {SCHEMA_VERSION})"
            )
        if not self.name or not isinstance(self.name, str):
            raise ScenarioError("scenario needs a non-empty name")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ScenarioError("seed must be a non-negative integer")
        if not isinstance(self.terrain, list) or not self.terrain:
            raise ScenarioError("terrain must be a non-empty list of segments")
        for seg in self.terrain:
            unknown = set(seg) - _TERRAIN_KEYS
            if unknown:
                raise ScenarioError(f"unknown terrain key(s): {sorted(unknown)}")
            if "start_x" not in seg or "slope_deg" not in seg:
                raise ScenarioError("terrain segments need start_x and slope_deg")
        if self.gait["mode"] not in ("trot", "stand"):
            raise ScenarioError(f"unknown gait mode {self.gait['mode']!r}")
        if self.gait["num_phases"] < 1:
            raise ScenarioError("num_phases must be at least 1")
        if self.gait["phase_duration"] <= 0.0:
            raise ScenarioError("phase_duration must be positive")

        unknown = set(self.transcription) - _transcription_fields()
        if unknown:
            raise ScenarioError(f"unknown transcription option(s): {sorted(unknown)}")
        unknown = set(self.solver) - _solver_fields()
        if unknown:
            raise ScenarioError(f"unknown solver option(s): {sorted(unknown)}")

        dt = float(self.sim["dt"])
        if dt <= 0.0:
            raise ScenarioError("sim.dt must be positive")
        log_hz = float(self.sim["log_hz"])
        if log_hz <= 0.0:
            raise ScenarioError("sim.log_hz must be positive")
        # the logger decimates the integration grid, so both ratios must be
        # whole numbers or sample times would drift off the nominal grid
        stride = 1.0 / (dt * log_hz)
        if abs(stride - round(stride)) > 1e-9 or round(stride) < 1:
            raise ScenarioError("1/(dt*log_hz) must be a positive integer")
        steps = self.gait["phase_duration"] / dt
        if abs(steps - round(steps)) > 1e-6:
            raise ScenarioError("phase_duration must be an integer multiple of sim.dt")
        if float(self.sim["guess_jitter"]) < 0.0:
            raise ScenarioError("sim.guess_jitter must be >= 0")
        if float(self.sim["stance_kp"]) < 0.0 or float(self.sim["stance_kd"]) < 0.0:
            raise ScenarioError("stance servo gains must be >= 0")

        # fail early on bad sub-configs rather than deep inside the run
        self.build_params()
        self.build_terrain()

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "name": self.name,
            "seed": self.seed,
            "thrust": bool(self.thrust),
            "terrain": copy.deepcopy(self.terrain),
            "gait": copy.deepcopy(self.gait),
            "reference": copy.deepcopy(self.reference),
            "robot": copy.deepcopy(self.robot),
            "transcription": copy.deepcopy(self.transcription),
            "solver": copy.deepcopy(self.solver),
            "sim": copy.deepcopy(self.sim),
        }

    def with_overrides(self, **kw) -> "Scenario":
        """New scenario with selected fields replaced (None values ignored)."""
        data = self.to_dict()
        for key, value in kw.items():
            if value is None:
                continue
            if key in ("seed", "thrust", "name"):
                data[key] = value
            elif key == "dt":
                data["sim"]["dt"] = float(value)
            elif key == "nodes_per_phase":
                data["transcription"]["nodes_per_phase"] = int(value)
            else:
                raise ScenarioError(f"unknown override {key!r}")
        return Scenario(**_split_top_level(data))

    # ------------------------------------------------------------------
    # builders

    def build_params(self) -> RobotParams:
        return RobotParams.from_dict(self.robot)

    def build_terrain(self) -> TerrainProfile:
        segs = [
            TerrainSegment(
                start_x=float(d["start_x"]),
                slope=float(np.deg2rad(d["slope_deg"])),
                friction=float(d.get("friction", 0.35)),
            )
            for d in self.terrain
        ]
        return TerrainProfile(segs)

    def build_schedule(self) -> GaitSchedule:
        g = self.gait
        return GaitSchedule(
            phase_duration=float(g["phase_duration"]),
            num_phases=int(g["num_phases"]),
            mode=g["mode"],
            first_pair=int(g["first_pair"]),
            stand_legs=tuple(g["stand_legs"]),
        )

    def build_reference(
        self, terrain: TerrainProfile, schedule: GaitSchedule
    ) -> ReferenceTrajectory:
        r = self.reference
        return ReferenceTrajectory(
            terrain,
            start_x=float(r["start_x"]),
            speed=float(r["speed"]),
            body_height=float(r["body_height"]),
            duration=schedule.duration,
            blend_time=float(r["blend_time"]),
            t0=schedule.t0,
        )

    def build_plan(self) -> tuple[RobotParams, TerrainProfile, GaitSchedule, ReferenceTrajectory, GaitPlan]:
        params = self.build_params()
        terrain = self.build_terrain()
        schedule = self.build_schedule()
        reference = self.build_reference(terrain, schedule)
        travel = float(self.reference["speed"]) * schedule.duration
        x0 = float(self.reference["start_x"])
        lattice = FootholdLattice.build(
            terrain,
            params.hip_offsets[:, 1],
            x0 - 1.5,
            x0 + travel + 1.5,
            spacing=float(self.sim["lattice_spacing"]),
        )
        plan = GaitPlan(
            terrain, schedule, reference, params, lattice,
            clearance=float(self.sim["clearance"]),
        )
        return params, terrain, schedule, reference, plan

    def transcription_options(self) -> TranscriptionOptions:
        kw = dict(self.transcription)
        for key in ("w_force", "w_moment"):
            if key in kw:
                kw[key] = np.asarray(kw[key], dtype=float)
        return TranscriptionOptions(**kw)

    def solver_options(self, **extra) -> SolverOptions:
        return SolverOptions(**self.solver, **extra)


def _split_top_level(data: dict) -> dict:
    known = {f.name for f in fields(Scenario)}
    unknown = set(data) - known
    if unknown:
        raise ScenarioError(f"unknown scenario key(s): {sorted(unknown)}")
    return data


def scenario_hash(scenario: Scenario) -> str:
    """Short content hash of the resolved configuration."""
    blob = json.dumps(scenario.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def builtin_scenario_names() -> list[str]:
    root = importlib.resources.files("wairsim.runner") / "scenarios"
    return sorted(p.name[: -len(".yaml")] for p in root.iterdir() if p.name.endswith(".yaml"))


def load_scenario(name_or_path: str) -> Scenario:
    """Load a builtin scenario by name or any scenario YAML by path."""
    if os.path.exists(name_or_path):
        with open(name_or_path) as fh:
            data = yaml.safe_load(fh)
    else:
        res = importlib.resources.files("wairsim.runner") / "scenarios" / f"{name_or_path}.yaml"
        if not res.is_file():
            raise ScenarioError(
                f"no scenario file {name_or_path!r} and no builtin of that name "
                f"(builtins: {', '.join(builtin_scenario_names())})"
            )
        data = yaml.safe_load(res.read_text())
    if not isinstance(data, dict):
        raise ScenarioError("scenario file must contain a mapping")
    return Scenario(**_split_top_level(data))
