"""Compare the compiled and pure-python evaluation backends.

Times the three operations the solver actually spends its life in — point
dynamics, full phase evaluation, and the fused merit+gradient — on the
standard uphill trot phase, and cross-checks the outputs while at it.

Run:  python3 benchmarks/bench_backends.py [--nodes N] [--repeats R]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

import wairsim.fastpath as fastpath
from wairsim.collocation.problem import TranscriptionOptions, transcribe
from wairsim.dynamics.params import RobotParams
from wairsim.gait.footholds import FootholdLattice
from wairsim.gait.plan import GaitPlan
from wairsim.gait.reference import ReferenceTrajectory
from wairsim.gait.schedule import GaitSchedule
from wairsim.gait.terrain import TerrainProfile, TerrainSegment


def build_phase(nodes: int):
    params = RobotParams()
    terrain = TerrainProfile([TerrainSegment(-3.0, np.deg2rad(30.0), 0.35)])
    schedule = GaitSchedule(phase_duration=0.5, num_phases=2, mode="trot")
    reference = ReferenceTrajectory(
        terrain,
        start_x=0.0,
        speed=0.375,
        body_height=0.32,
        duration=schedule.duration,
    )
    lattice = FootholdLattice.build(
        terrain, params.hip_offsets[:, 1], -2.0, 3.0, spacing=0.1
    )
    plan = GaitPlan(terrain, schedule, reference, params, lattice)
    phase = plan.phases[0]
    return transcribe(
        phase,
        params,
        reference.body_state(phase.t_start),
        reference.body_state,
        options=TranscriptionOptions(nodes_per_phase=nodes),
        name="bench",
    )


def timeit(fn, repeats: int) -> float:
    fn()  # warm up (and, for the compiled path, fault in the module)
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nodes", type=int, default=11)
    ap.add_argument("--repeats", type=int, default=20)
    args = ap.parse_args()

    tp = build_phase(args.nodes)
    ctx = tp.context
    Y = tp.nlp().x0.copy()
    rng = np.random.default_rng(0)
    Y = Y + 0.005 * rng.standard_normal(Y.size)
    mu_eq = rng.standard_normal(ctx.n_eq)
    mu_in = np.abs(rng.standard_normal(ctx.n_ineq))
    rho = 100.0

    n, nx, nu = ctx.n_nodes, ctx.nx, ctx.nu
    X = Y[: n * nx].reshape(n, nx)
    U = Y[n * nx :].reshape(n, nu) * ctx.u_limits
    chi = ctx.chi[0::2]

    backends = []
    for name in ("python", "compiled"):
        try:
            backends.append((name, fastpath.get_backend(name)))
        except ImportError:
            print(f"{name} backend unavailable; skipping")

    results: dict[str, dict[str, float]] = {}
    outputs: dict[str, tuple] = {}
    for name, be in backends:
        results[name] = {
            "eval_dynamics": timeit(lambda: be.eval_dynamics(X, U, chi, ctx), args.repeats),
            "phase_eval": timeit(lambda: be.phase_eval(Y, ctx), args.repeats),
            "merit_and_grad": timeit(
                lambda: be.al_merit_and_grad(Y, ctx, mu_eq, mu_in, rho), args.repeats
            ),
        }
        outputs[name] = (
            be.phase_eval(Y, ctx),
            be.al_merit_and_grad(Y, ctx, mu_eq, mu_in, rho),
        )

    header = f"{'operation':>16s}" + "".join(f"{name:>14s}" for name, _ in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10s}"
    print(header)
    for op in ("eval_dynamics", "phase_eval", "merit_and_grad"):
        row = f"{op:>16s}"
        for name, _ in backends:
            row += f"{results[name][op] * 1e3:12.3f}ms"
        if len(backends) == 2:
            ratio = results["python"][op] / results["compiled"][op]
            row += f"{ratio:9.1f}x"
        print(row)

    if len(backends) == 2:
        (c1, e1, i1, l1), (m1, g1) = outputs["python"]
        (c2, e2, i2, l2), (m2, g2) = outputs["compiled"]
        print("\nagreement (max abs diff):")
        print(f"  cost  {abs(c1 - c2):.3e}")
        print(f"  eq    {np.max(np.abs(e1 - e2)):.3e}")
        print(f"  ineq  {np.max(np.abs(i1 - i2)):.3e}")
        print(f"  lam   {np.max(np.abs(l1 - l2)):.3e}")
        print(f"  merit {abs(m1 - m2):.3e}")
        print(f"  grad  {np.max(np.abs(g1 - g2) / np.maximum(1.0, np.abs(g1))):.3e} (rel)")


if __name__ == "__main__":
    main()
