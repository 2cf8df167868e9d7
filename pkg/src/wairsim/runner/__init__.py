"""Episode runner: scenario files, phase-chained planning, integration, export."""

from .scenario import Scenario, builtin_scenario_names, load_scenario, scenario_hash
from .episode import EpisodeLog, EpisodeResult, PhaseRecord, run_episode
from .export import write_artifacts

__all__ = [
    "Scenario",
    "builtin_scenario_names",
    "load_scenario",
    "scenario_hash",
    "EpisodeLog",
    "EpisodeResult",
    "PhaseRecord",
    "run_episode",
    "write_artifacts",
]
