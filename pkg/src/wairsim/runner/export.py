"""Artifact writers: trajectory CSV, phase table, JSON summary.

Artifacts are deterministic by construction -- full-precision ``%.17g``
floats, sorted JSON keys, CRLF row endings per RFC 4180, and no wall-clock
or host information anywhere.  Two runs of the same scenario hash produce
byte-identical files, which is what ``wairsim repro`` checks.
"""

from __future__ import annotations

import csv
import json
import os

import numpy as np

from ..dynamics.params import LEG_NAMES
from .episode import EpisodeLog, EpisodeResult

_PHASE_COLUMNS = (
    "index", "t_start", "t_end", "stance", "status", "objective",
    "max_violation", "kkt_residual", "outer_iterations", "inner_iterations",
    "n_evaluations", "touchdown_miss", "plan_deviation",
)


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{value:.17g}"
    return str(value)


def log_table(log: EpisodeLog) -> tuple[list[str], np.ndarray]:
    """Header and (N, n_cols) float matrix for the trajectory CSV."""
    header = ["time"]
    header += ["px", "py", "pz", "roll", "pitch", "yaw",
               "vx", "vy", "vz", "roll_rate", "pitch_rate", "yaw_rate"]
    header += ["fx", "fy", "fz", "mx", "my", "mz"]
    for leg in LEG_NAMES:
        header += [f"{leg}_fx", f"{leg}_fy", f"{leg}_fz"]
    header += [f"{leg}_fn" for leg in LEG_NAMES]
    header += [f"{leg}_ft" for leg in LEG_NAMES]
    header += [f"{leg}_ratio" for leg in LEG_NAMES]
    header += [f"{leg}_margin" for leg in LEG_NAMES]
    header += [f"{leg}_stance" for leg in LEG_NAMES]
    header += ["phase"]
    for leg in LEG_NAMES:
        header += [f"{leg}_pitch_q", f"{leg}_roll_q", f"{leg}_len"]
    header += ["kinetic", "potential",
               "constraint_residual", "squeeze_residual"]
    n = len(log)
    mat = np.hstack([
        log.times[:, None],
        log.body,
        log.wrench,
        log.forces.reshape(n, 12),
        log.normal,
        log.tangential,
        log.ratio,
        log.margin,
        log.stance.astype(float),
        log.phase[:, None].astype(float),
        log.leg_q.reshape(n, 12),
        log.kinetic[:, None],
        log.potential[:, None],
        log.constraint_residual[:, None],
        log.squeeze_residual[:, None],
    ])
    assert mat.shape == (n, len(header))
    return header, mat


def write_log_csv(path: str, log: EpisodeLog) -> None:
    header, mat = log_table(log)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in mat:
            writer.writerow([_fmt(v) for v in row])


def write_phases_csv(path: str, result: EpisodeResult) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(_PHASE_COLUMNS)
        for record in result.phases:
            row = record.row()
            writer.writerow([_fmt(row[k]) for k in _PHASE_COLUMNS])


def write_summary_json(path: str, result: EpisodeResult) -> None:
    # wall times stay out of the summary so repeated runs compare byte-equal;
    # they are printed to the console instead
    with open(path, "w") as fh:
        json.dump(result.summary(), fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_scenario_json(path: str, result: EpisodeResult) -> None:
    payload = {"hash": result.scenario_hash, "config": result.scenario.to_dict()}
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_artifacts(out_dir: str, result: EpisodeResult) -> dict[str, str]:
    """Write all artifacts into out_dir; returns {artifact: path}."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "log": os.path.join(out_dir, "log.csv"),
        "phases": os.path.join(out_dir, "phases.csv"),
        "summary": os.path.join(out_dir, "summary.json"),
        "scenario": os.path.join(out_dir, "scenario.json"),
    }
    write_log_csv(paths["log"], result.log)
    write_phases_csv(paths["phases"], result)
    write_summary_json(paths["summary"], result)
    write_scenario_json(paths["scenario"], result)
    return paths
