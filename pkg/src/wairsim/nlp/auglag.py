"""Augmented-Lagrangian solver over an L-BFGS-B inner step.

Equalities use the classic multiplier term, inequalities the
Powell-Hestenes-Rockafellar form, so the merit for c(y) = 0, g(y) >= 0 is

    phi(y) = f(y) - mu_eq . c + (rho/2)|c|^2
             + (1/(2 rho)) sum_j [ max(0, mu_in_j - rho g_j)^2 - mu_in_j^2 ]

First-order multiplier updates run after every inner solve; the penalty
additionally grows by a fixed factor whenever the worst violation failed to
drop enough over the previous outer iteration. Variable box bounds are
handled exactly by the inner projected quasi-Newton step, not by penalties.

Gradients are central finite differences of the merit unless the problem
carries a fused evaluator (compiled backend) providing value/gradient in one
pass. All tolerances and evaluation orders are fixed, so a solve is
bit-reproducible for identical inputs.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .problem import NlpProblem, SolveReport


@dataclass
class SolverOptions:
    tol: float = 1e-6
    stationarity_tol: float = 1e-6
    max_outer: int = 30
    inner_maxiter: int = 600
    # gtol must stay above the finite-difference noise floor (~|f| eps / h),
    # or the inner loop spins at maxiter chasing gradient noise.
    inner_gtol: float = 1e-8
    inner_ftol: float = 1e-12
    # early outers only need the subproblem solved to the scale of the
    # current infeasibility; the floor above applies once duals settle
    inner_gtol_ceiling: float = 1e-3
    inner_gtol_drop: float = 0.3
    initial_penalty: float = 1.0
    penalty_growth: float = 10.0
    penalty_cap: float = 1e12
    multiplier_cap: float = 1e6
    violation_drop: float = 0.5
    fd_step: float = 1e-6
    log_path: str | None = None
    verbose: bool = False


class _Evaluator:
    """Merit/components evaluation with an optional fused backend."""

    def __init__(self, problem: NlpProblem, options: SolverOptions):
        self.problem = problem
        self.options = options
        self.n_evals = 0

    def components(self, y: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        self.n_evals += 1
        if self.problem.fused is not None:
            return self.problem.fused.components(y)
        return float(self.problem.objective(y)), self.problem.eq(y), self.problem.ineq(y)

    def merit(self, y, mu_eq, mu_in, rho) -> float:
        if self.problem.fused is not None:
            self.n_evals += 1
            return float(self.problem.fused.merit(y, mu_eq, mu_in, rho))
        f, c, g = self.components(y)
        return _merit_from_parts(f, c, g, mu_eq, mu_in, rho)

    def merit_grad(self, y, mu_eq, mu_in, rho) -> np.ndarray:
        if self.problem.fused is not None and hasattr(self.problem.fused, "merit_grad"):
            self.n_evals += 2 * y.size
            return np.asarray(self.problem.fused.merit_grad(y, mu_eq, mu_in, rho))
        h0 = self.options.fd_step
        grad = np.zeros_like(y)
        for i in range(y.size):
            h = h0 * max(1.0, abs(y[i]))
            yp = y.copy()
            yp[i] += h
            ym = y.copy()
            ym[i] -= h
            grad[i] = (
                self.merit(yp, mu_eq, mu_in, rho) - self.merit(ym, mu_eq, mu_in, rho)
            ) / (2.0 * h)
        return grad

    def merit_and_grad(self, y, mu_eq, mu_in, rho) -> tuple[float, np.ndarray]:
        if self.problem.fused is not None and hasattr(self.problem.fused, "merit_and_grad"):
            self.n_evals += 2 * y.size + 1
            val, grad = self.problem.fused.merit_and_grad(y, mu_eq, mu_in, rho)
            return float(val), np.asarray(grad)
        return (
            self.merit(y, mu_eq, mu_in, rho),
            self.merit_grad(y, mu_eq, mu_in, rho),
        )


def _merit_from_parts(f, c, g, mu_eq, mu_in, rho) -> float:
    val = f
    if c.size:
        val += -mu_eq @ c + 0.5 * rho * (c @ c)
    if g.size:
        t = np.maximum(0.0, mu_in - rho * g)
        val += ((t @ t) - (mu_in @ mu_in)) / (2.0 * rho)
    return float(val)


def _projected_gradient_norm(y, grad, bounds) -> float:
    if bounds is None:
        return float(np.max(np.abs(grad))) if grad.size else 0.0
    pg = grad.copy()
    at_lower = y <= bounds[:, 0] + 1e-12
    at_upper = y >= bounds[:, 1] - 1e-12
    pg[at_lower] = np.minimum(pg[at_lower], 0.0)
    pg[at_upper] = np.maximum(pg[at_upper], 0.0)
    return float(np.max(np.abs(pg))) if pg.size else 0.0


class _IterationLog:
    def __init__(self, path: str | None):
        self._fh = open(path, "w") if path else None
        self.count = 0

    def record(self, outer: int, objective: float, violation: float, step_norm: float) -> None:
        self.count += 1
        if self._fh is not None:
            self._fh.write(
                json.dumps(
                    {
                        "iter": self.count,
                        "outer": outer,
                        "objective": objective,
                        "violation": violation,
                        "step_norm": step_norm,
                    }
                )
                + "\n"
            )

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()


def solve(
    problem: NlpProblem,
    options: SolverOptions | None = None,
    warm: dict | None = None,
    **kwargs,
) -> SolveReport:
    """Solve an NlpProblem; keyword arguments override SolverOptions fields.

    ``warm`` may carry ``mu_eq``/``mu_in``/``rho`` from a structurally
    identical solve (phase chaining) to skip the dual/penalty ramp-up.
    """
    opts = options or SolverOptions()
    for k, v in kwargs.items():
        if not hasattr(opts, k):
            raise TypeError(f"unknown solver option {k!r}")
        setattr(opts, k, v)

    t_start = time.perf_counter()
    ev = _Evaluator(problem, opts)
    log = _IterationLog(opts.log_path)

    y = problem.x0.astype(float).copy()
    if problem.bounds is not None:
        y = np.clip(y, problem.bounds[:, 0], problem.bounds[:, 1])
    _, c, g = ev.components(y)
    mu_eq = np.zeros(c.size)
    mu_in = np.zeros(g.size)
    rho = opts.initial_penalty
    if warm:
        if "mu_eq" in warm and np.asarray(warm["mu_eq"]).shape == mu_eq.shape:
            mu_eq = np.asarray(warm["mu_eq"], dtype=float).copy()
        if "mu_in" in warm and np.asarray(warm["mu_in"]).shape == mu_in.shape:
            mu_in = np.maximum(0.0, np.asarray(warm["mu_in"], dtype=float))
        if "rho" in warm:
            rho = float(np.clip(warm["rho"], opts.initial_penalty, opts.penalty_cap))
    v_prev = _violation(c, g)
    inner_total = 0
    status, message = "max_outer", "outer iteration limit reached"
    pg_norm = np.inf
    scipy_bounds = None
    if problem.bounds is not None:
        scipy_bounds = [
            (lo if np.isfinite(lo) else None, hi if np.isfinite(hi) else None)
            for lo, hi in problem.bounds
        ]

    outer_used = 0
    for outer in range(opts.max_outer):
        outer_used = outer + 1
        prev = {"y": y.copy()}

        def merit_pair(z, _mu_eq=mu_eq, _mu_in=mu_in, _rho=rho):
            return ev.merit_and_grad(z, _mu_eq, _mu_in, _rho)

        def callback(zk, _outer=outer, _prev=prev):
            f_k, c_k, g_k = ev.components(zk)
            v_k = _violation(c_k, g_k)
            log.record(_outer, f_k, v_k, float(np.linalg.norm(zk - _prev["y"])))
            _prev["y"] = zk.copy()

        gtol_k = max(
            opts.inner_gtol,
            min(opts.inner_gtol_ceiling, opts.inner_gtol_drop * v_prev),
        )
        res = minimize(
            merit_pair,
            y,
            jac=True,
            method="L-BFGS-B",
            bounds=scipy_bounds,
            # per-iteration logging costs a full component evaluation, so
            # only hook the callback when a log was requested
            callback=callback if opts.log_path is not None else None,
            options={
                "maxiter": opts.inner_maxiter,
                "maxcor": 20,
                "ftol": opts.inner_ftol,
                "gtol": gtol_k,
            },
        )
        y = np.asarray(res.x, dtype=float)
        inner_total += int(res.nit)
        pg_norm = _projected_gradient_norm(y, np.asarray(res.jac, dtype=float), problem.bounds)

        f, c, g = ev.components(y)
        v = _violation(c, g)
        if opts.verbose:
            print(
                f"[auglag] outer {outer}: f={f:.6e} viol={v:.3e} rho={rho:.1e} pg={pg_norm:.2e}"
            )

        if v <= opts.tol and pg_norm <= opts.stationarity_tol:
            status, message = "converged", "KKT residual below tolerance"
            break
        # first-order dual update every outer: the subproblem minimizer can
        # sit at a stubbornly nonzero violation for fixed duals, and only the
        # multiplier shift moves it. Penalty growth alone deadlocks there.
        cap = opts.multiplier_cap
        if c.size:
            mu_eq = np.clip(mu_eq - rho * c, -cap, cap)
        if g.size:
            mu_in = np.clip(np.maximum(0.0, mu_in - rho * g), 0.0, cap)
        # stiffen only on insufficient progress over the previous outer
        # (not the best seen, which ratchets the penalty over plateaus)
        if v > max(opts.tol, opts.violation_drop * v_prev):
            if rho >= opts.penalty_cap:
                status, message = "failed", "penalty cap reached while infeasible"
                break
            rho = min(rho * opts.penalty_growth, opts.penalty_cap)
        v_prev = v

    log.close()
    f, c, g = ev.components(y)
    violation = _violation(c, g)
    if status == "converged" and violation > opts.tol:
        status, message = "failed", "violation exceeded tolerance on recheck"
    return SolveReport(
        status=status,
        x=y,
        objective=f,
        max_violation=violation,
        kkt_residual=max(violation, pg_norm),
        outer_iterations=outer_used,
        inner_iterations=inner_total,
        n_evaluations=ev.n_evals,
        multipliers_eq=mu_eq,
        multipliers_ineq=mu_in,
        wall_time=time.perf_counter() - t_start,
        message=message,
    )


def _violation(c: np.ndarray, g: np.ndarray) -> float:
    v = 0.0
    if c.size:
        v = float(np.max(np.abs(c)))
    if g.size:
        v = max(v, float(max(0.0, -np.min(g))))
    return v
