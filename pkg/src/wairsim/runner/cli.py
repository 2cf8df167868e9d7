"""Command-line front end.

    wairsim run   --scenario wair30 --out runs/demo
    wairsim run   --scenario wair30 --no-thrust --out runs/baseline
    wairsim check --scenario wair30
    wairsim repro --scenario standing --seed 7

``run`` solves and integrates one scenario and writes the artifact set;
``check`` validates a scenario and prints the resolved configuration and its
hash without running anything; ``repro`` runs a scenario twice and verifies
the artifacts are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

from ..errors import WairsimError
from . import export
from .episode import run_episode
from .scenario import builtin_scenario_names, load_scenario, scenario_hash


def _add_scenario_args(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--scenario",
        default="wair30",
        help="builtin scenario name or path to a scenario YAML "
        f"(builtins: {', '.join(builtin_scenario_names())})",
    )
    p.add_argument("--seed", type=int, default=None, help="override scenario seed")
    p.add_argument("--dt", type=float, default=None, help="override integration step")
    p.add_argument(
        "--nodes", type=int, default=None, help="override collocation nodes per phase"
    )
    p.add_argument(
        "--no-thrust",
        action="store_true",
        help="skip wrench planning; integrate the same gait open-loop and "
        "report the (inadmissible) contact forces",
    )
    p.add_argument(
        "--backend",
        choices=("python", "compiled"),
        default=None,
        help="force an evaluation backend (default: best available)",
    )


def _resolve(args) -> "Scenario":
    sc = load_scenario(args.scenario)
    overrides = {"seed": args.seed, "dt": args.dt, "nodes_per_phase": args.nodes}
    if args.no_thrust:
        overrides["thrust"] = False
    return sc.with_overrides(**overrides)


def _progress_printer(quiet: bool):
    if quiet:
        return None

    def emit(record) -> None:
        if record.status == "open-loop":
            print(
                f"[phase {record.index:02d}] stance={record.stance_label:<5s} "
                f"open-loop (no thrust)",
                flush=True,
            )
            return
        print(
            f"[phase {record.index:02d}] stance={record.stance_label:<5s} "
            f"status={record.status} obj={record.objective:.3e} "
            f"viol={record.max_violation:.1e} kkt={record.kkt_residual:.1e} "
            f"outers={record.outer_iterations} evals={record.n_evaluations} "
            f"td_miss={record.touchdown_miss:.1e} "
            f"wall={record.wall_time:.1f}s",
            flush=True,
        )

    return emit


def _print_summary(summary: dict) -> None:
    contact = summary["contact"]
    thrust = summary["thrust_stats"]
    track = summary["tracking"]
    print(
        f"\nscenario {summary['scenario']} hash={summary['hash']} "
        f"seed={summary['seed']} thrust={'on' if summary['thrust'] else 'off'} "
        f"backend={summary['backend']}"
    )
    print(
        f"  contact : min normal {contact['min_normal']:+.3f} N, "
        f"max |ft|/fn {contact['max_ratio']:.4f}, "
        f"min cone margin {contact['min_margin']:+.3f} N"
    )
    print(
        f"  thrust  : mean force [{thrust['mean_force'][0]:+.2f} "
        f"{thrust['mean_force'][1]:+.2f} {thrust['mean_force'][2]:+.2f}] N, "
        f"peak {thrust['peak_force']:.2f} N"
    )
    print(
        f"  tracking: touchdown miss <= {track['max_touchdown_miss']:.2e} m, "
        f"plan deviation <= {track['max_plan_deviation']:.2e}, "
        f"pin residual <= {track['max_constraint_residual']:.2e}"
    )
    body = summary["body_final"]
    print(f"  final   : x={body[0]:+.3f} m z={body[2]:+.3f} m pitch={body[4]:+.3f} rad")


def _cmd_run(args) -> int:
    sc = _resolve(args)
    out_dir = args.out or os.path.join("runs", f"{sc.name}-{scenario_hash(sc)[:8]}")
    result = run_episode(sc, backend=args.backend, progress=_progress_printer(args.quiet))
    paths = export.write_artifacts(out_dir, result)
    if not args.quiet:
        _print_summary(result.summary())
        print(f"\nartifacts in {out_dir}:")
        for key in sorted(paths):
            print(f"  {key:<8s} {paths[key]}")
    return 0


def _cmd_check(args) -> int:
    sc = _resolve(args)
    payload = {
        "hash": scenario_hash(sc),
        "config": sc.to_dict(),
        "derived": {
            "episode_duration": sc.gait["num_phases"] * sc.gait["phase_duration"],
            "integration_steps": round(
                sc.gait["num_phases"] * sc.gait["phase_duration"] / sc.sim["dt"]
            ),
            "log_samples": round(
                sc.gait["num_phases"] * sc.gait["phase_duration"] * sc.sim["log_hz"]
            )
            + 1,
        },
    }
    json.dump(payload, sys.stdout, sort_keys=True, indent=2)
    print()
    return 0


def _cmd_repro(args) -> int:
    sc = _resolve(args)
    print(f"running {sc.name} (hash {scenario_hash(sc)}) twice ...")
    with tempfile.TemporaryDirectory(prefix="wairsim-repro-") as tmp:
        paths = []
        for tag in ("a", "b"):
            result = run_episode(sc, backend=args.backend, progress=None)
            out = os.path.join(tmp, tag)
            paths.append(export.write_artifacts(out, result))
            print(f"  run {tag} done")
        identical = True
        for key in sorted(paths[0]):
            with open(paths[0][key], "rb") as fa, open(paths[1][key], "rb") as fb:
                same = fa.read() == fb.read()
            print(f"  {key:<8s} {'identical' if same else 'DIFFERS'}")
            identical &= same
    print("byte-identical" if identical else "MISMATCH: runs are not reproducible")
    return 0 if identical else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="wairsim",
        description="thruster-assisted quadruped incline walking: plan, integrate, export",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="solve and integrate one scenario")
    _add_scenario_args(p_run)
    p_run.add_argument("--out", default=None, help="artifact directory (default runs/<name>-<hash>)")
    p_run.add_argument("--quiet", action="store_true", help="suppress progress output")
    p_run.set_defaults(func=_cmd_run)

    p_check = sub.add_parser("check", help="validate a scenario, print config and hash")
    _add_scenario_args(p_check)
    p_check.set_defaults(func=_cmd_check)

    p_repro = sub.add_parser("repro", help="run twice and compare artifact bytes")
    _add_scenario_args(p_repro)
    p_repro.set_defaults(func=_cmd_repro)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except WairsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
