"""Pure-numpy reference implementation of the hot evaluation path.

Evaluates the reduced body dynamics (stance legs reconstructed by inverse
kinematics, contact forces from the minimum-norm KKT solve) at batches of
evaluation points, and assembles phase cost/constraints for the collocation
NLP. The compiled backend mirrors these semantics exactly; cross-backend
agreement is tested to tight tolerance.

Batched conventions: leading axis B indexes evaluation points; matrices are
(B, 3, 3); einsum/cross do the heavy lifting. Everything is float64 and
evaluation order is fixed, so results are bit-stable across runs.
"""

from __future__ import annotations

import numpy as np

from ..errors import SingularKKT

NAME = "python"


def _solve_vec(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    # batched A x = b with a vector right-hand side per batch entry
    return np.linalg.solve(A, b[..., None])[..., 0]


# ---------------------------------------------------------------------------
# batched spatial helpers


def _rotations(eul: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """R, E, and the E partial-derivative stack for batched Euler angles."""
    yaw, pitch, roll = eul[:, 0], eul[:, 1], eul[:, 2]
    cy, sy = np.cos(yaw), np.sin(yaw)
    ct, st = np.cos(pitch), np.sin(pitch)
    cr, sr = np.cos(roll), np.sin(roll)
    B = len(yaw)
    R = np.empty((B, 3, 3))
    R[:, 0, 0] = cy * ct
    R[:, 0, 1] = cy * st * sr - sy * cr
    R[:, 0, 2] = cy * st * cr + sy * sr
    R[:, 1, 0] = sy * ct
    R[:, 1, 1] = sy * st * sr + cy * cr
    R[:, 1, 2] = sy * st * cr - cy * sr
    R[:, 2, 0] = -st
    R[:, 2, 1] = ct * sr
    R[:, 2, 2] = ct * cr
    E = np.zeros((B, 3, 3))
    E[:, 0, 0] = -st
    E[:, 0, 2] = 1.0
    E[:, 1, 0] = ct * sr
    E[:, 1, 1] = cr
    E[:, 2, 0] = ct * cr
    E[:, 2, 1] = -sr
    dE = np.zeros((B, 3, 3, 3))  # axis 1: derivative w.r.t. (yaw, pitch, roll)
    dE[:, 1, 0, 0] = -ct
    dE[:, 1, 1, 0] = -st * sr
    dE[:, 1, 2, 0] = -st * cr
    dE[:, 2, 1, 0] = ct * cr
    dE[:, 2, 1, 1] = -sr
    dE[:, 2, 2, 0] = -ct * sr
    dE[:, 2, 2, 1] = -cr
    return R, E, dE


def _leg_geometry(q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hip-to-foot vector and its joint Jacobian for batched joint coords."""
    phi, gamma, length = q[:, 0], q[:, 1], q[:, 2]
    cg, sg = np.cos(gamma), np.sin(gamma)
    cp, sp = np.cos(phi), np.sin(phi)
    B = len(phi)
    lf = np.stack([-length * cg * sp, length * sg, -length * cg * cp], axis=1)
    D = np.empty((B, 3, 3))
    D[:, 0, 0] = -length * cg * cp
    D[:, 0, 1] = length * sg * sp
    D[:, 0, 2] = -cg * sp
    D[:, 1, 0] = 0.0
    D[:, 1, 1] = length * cg
    D[:, 1, 2] = sg
    D[:, 2, 0] = length * cg * sp
    D[:, 2, 1] = length * sg * cp
    D[:, 2, 2] = -cg * cp
    return lf, D


def _leg_jacobian_dot(q: np.ndarray, dq: np.ndarray) -> np.ndarray:
    phi, gamma, length = q[:, 0], q[:, 1], q[:, 2]
    cg, sg = np.cos(gamma), np.sin(gamma)
    cp, sp = np.cos(phi), np.sin(phi)
    B = len(phi)
    dD_phi = np.zeros((B, 3, 3))
    dD_phi[:, 0, 0] = length * cg * sp
    dD_phi[:, 0, 1] = length * sg * cp
    dD_phi[:, 0, 2] = -cg * cp
    dD_phi[:, 2, 0] = length * cg * cp
    dD_phi[:, 2, 1] = -length * sg * sp
    dD_phi[:, 2, 2] = cg * sp
    dD_gam = np.zeros((B, 3, 3))
    dD_gam[:, 0, 0] = length * sg * cp
    dD_gam[:, 0, 1] = length * cg * sp
    dD_gam[:, 0, 2] = sg * sp
    dD_gam[:, 1, 1] = -length * sg
    dD_gam[:, 1, 2] = cg
    dD_gam[:, 2, 0] = -length * sg * sp
    dD_gam[:, 2, 1] = length * cg * cp
    dD_gam[:, 2, 2] = sg * cp
    dD_len = np.zeros((B, 3, 3))
    dD_len[:, 0, 0] = -cg * cp
    dD_len[:, 0, 1] = sg * sp
    dD_len[:, 1, 1] = cg
    dD_len[:, 2, 0] = cg * sp
    dD_len[:, 2, 1] = sg * cp
    return (
        dD_phi * dq[:, 0, None, None]
        + dD_gam * dq[:, 1, None, None]
        + dD_len * dq[:, 2, None, None]
    )


def _mm(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.einsum("bij,bjk->bik", A, B)


def _mv(A: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("bij,bj->bi", A, v)


# ---------------------------------------------------------------------------
# core dynamics


def eval_dynamics(
    X: np.ndarray, U: np.ndarray, chi_rows: np.ndarray, ctx
) -> tuple[np.ndarray, np.ndarray]:
    """Reduced-state dynamics and contact forces at a batch of points.

    X: (B, nx) reduced body states; U: (B, nu) reduced controls;
    chi_rows: (B, n_c, 3) stance-joint acceleration drive.
    Returns (Xdot (B, nx), lam (B, n_c, 3) world frame).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    U = np.atleast_2d(np.asarray(U, dtype=float))
    B = X.shape[0]
    sfi = ctx.state_free_idx
    ufi = ctx.u_free_idx
    idx = ctx.body_idx
    rows = ctx.foot_rows
    n_c = ctx.n_contacts
    n_r = len(rows)

    xfull = np.tile(ctx.x_template, (B, 1))
    xfull[:, sfi] = X
    p, eul = xfull[:, 0:3], xfull[:, 3:6]
    v, erate = xfull[:, 6:9], xfull[:, 9:12]

    if np.any(np.abs(eul[:, 1]) > np.pi / 2 - 1e-6):
        raise FloatingPointError("pitch at gimbal limit during evaluation")

    wrench = np.zeros((B, 6))
    wrench[:, ufi] = U
    f_b, m_b = wrench[:, 0:3], wrench[:, 3:6]

    R, E, dE = _rotations(eul)
    Edot = np.einsum("bkij,bk->bij", dE, erate)
    omega = _mv(E, erate)
    I_B = ctx.inertia
    Iomega = omega @ I_B.T

    # M (reduced) and bias; W_k = (dE_k @ erate) . (I omega)
    M_rot = np.einsum("bji,jk,bkl->bil", E, I_B, E)
    W = np.einsum("bkij,bj,bi->bk", dE, erate, Iomega)
    h_rot = (
        np.einsum("bji,jk,bk->bi", E, I_B, _mv(Edot, erate))
        + np.einsum("bji,bj->bi", Edot, Iomega)
        - W
    )
    u_gen = np.concatenate([_mv(R, f_b), np.einsum("bji,bj->bi", E, m_b)], axis=1)
    h6 = np.concatenate([np.tile(-ctx.mass * ctx.gravity, (B, 1)), h_rot], axis=1)

    k = len(idx)
    M_red = np.zeros((B, k, k))
    for a, ia in enumerate(idx):
        for b_, ib in enumerate(idx):
            if ia < 3 and ib < 3:
                M_red[:, a, b_] = ctx.mass if ia == ib else 0.0
            elif ia >= 3 and ib >= 3:
                M_red[:, a, b_] = M_rot[:, ia - 3, ib - 3]
    rhs1 = (u_gen - h6)[:, idx]

    vdot6 = np.zeros((B, 6))
    lam_world = np.zeros((B, n_c, 3))

    if n_c == 0:
        vdot6[:, idx] = _solve_vec(M_red, rhs1)
    else:
        A_red = np.zeros((B, n_c * n_r, k))
        b_red = np.zeros((B, n_c * n_r))
        for j in range(n_c):
            hip = ctx.stance_hips[j]
            anchor = ctx.anchors[j]
            r = _mv(R.transpose(0, 2, 1), anchor - p) - hip
            length = np.linalg.norm(r, axis=1)
            if np.any(length < 1e-9):
                raise FloatingPointError("foot target at hip")
            sin_g = np.clip(r[:, 1] / length, -1.0, 1.0)
            gamma = np.arcsin(sin_g)
            phi = np.arctan2(-r[:, 0], -r[:, 2])
            q = np.stack([phi, gamma, length], axis=1)
            lf, D = _leg_geometry(q)
            c = hip + lf
            # columns: [I3 | -R skew(c) E]
            A_full = np.zeros((B, 3, 6))
            A_full[:, :, 0:3] = np.eye(3)
            skew_c = np.zeros((B, 3, 3))
            skew_c[:, 0, 1] = -c[:, 2]
            skew_c[:, 0, 2] = c[:, 1]
            skew_c[:, 1, 0] = c[:, 2]
            skew_c[:, 1, 2] = -c[:, 0]
            skew_c[:, 2, 0] = -c[:, 1]
            skew_c[:, 2, 1] = c[:, 0]
            A_full[:, :, 3:6] = -_mm(_mm(R, skew_c), E)
            # inverse-kinematic stance rates from the body twist
            foot_vel_body = _mv(R.transpose(0, 2, 1), v) + np.cross(omega, c)
            dq = _solve_vec(D, -foot_vel_body)
            c_dot = _mv(D, dq)
            kappa_body = (
                np.cross(omega, np.cross(omega, c))
                + np.cross(_mv(Edot, erate), c)
                + 2.0 * np.cross(omega, c_dot)
                + _mv(_leg_jacobian_dot(q, dq), dq)
            )
            b_full = _mv(R, kappa_body + _mv(D, chi_rows[:, j, :]))
            A_red[:, j * n_r : (j + 1) * n_r, :] = A_full[:, rows, :][:, :, idx]
            b_red[:, j * n_r : (j + 1) * n_r] = b_full[:, rows]

        Minv_rhs1 = _solve_vec(M_red, rhs1)
        Minv_AT = np.linalg.solve(M_red, A_red.transpose(0, 2, 1))
        G = _mm(A_red, Minv_AT)
        rhs2 = -b_red - _mv(A_red, Minv_rhs1)
        if n_c == 1:
            lam_flat = _spd_solve(G, rhs2)
        elif n_c == 2:
            s = ctx.squeeze
            proj = rhs2 - np.outer(rhs2 @ s, s)
            lam_flat = _spd_solve(G + np.outer(s, s), proj)
        else:
            raise SingularKKT("phase evaluator supports at most two stance feet")
        vdot6[:, idx] = Minv_rhs1 + _mv(Minv_AT, lam_flat)
        for j in range(n_c):
            lam_world[:, j, rows] = lam_flat[:, j * n_r : (j + 1) * n_r]

    xdot_full = np.concatenate([v, erate, vdot6], axis=1)
    return xdot_full[:, sfi], lam_world


def _spd_solve(G: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise SingularKKT("contact Schur complement not positive definite") from exc
    return _solve_vec(G, rhs)


# ---------------------------------------------------------------------------
# phase assembly


def _unpack(Y: np.ndarray, ctx) -> tuple[np.ndarray, np.ndarray]:
    n, nx, nu = ctx.n_nodes, ctx.nx, ctx.nu
    X = Y[: n * nx].reshape(n, nx)
    U = Y[n * nx :].reshape(n, nu)
    return X, U


def _node_cost(U: np.ndarray, ctx) -> np.ndarray:
    wrench = np.zeros((U.shape[0], 6))
    wrench[:, ctx.u_free_idx] = U
    w = np.concatenate([ctx.w_force, ctx.w_moment])
    return 0.5 * np.einsum("bi,i,bi->b", wrench, w, wrench)


def _cone_rows(lam: np.ndarray, ctx) -> np.ndarray:
    """(B, n_c * n_cone_rows) admissibility rows, in units of body weight."""
    B = lam.shape[0]
    out = np.zeros((B, ctx.n_contacts * ctx.n_cone_rows))
    for j in range(ctx.n_contacts):
        n = ctx.normals[j]
        mu = ctx.mu_eff[j]
        f = lam[:, j, :]
        fn = f @ n
        ft = f - np.outer(fn, n)
        col = j * ctx.n_cone_rows
        if ctx.cone_form == "exact":
            ft_mag = np.sqrt(np.einsum("bi,bi->b", ft, ft) + ctx.cone_smoothing**2)
            out[:, col] = fn - ctx.n_min_eff
            out[:, col + 1] = mu * fn - ft_mag
        else:
            e1, e2 = _tangent_basis(n)
            t1, t2 = ft @ e1, ft @ e2
            kk = mu / np.sqrt(2.0)
            out[:, col] = fn - ctx.n_min_eff
            out[:, col + 1] = kk * fn - t1
            out[:, col + 2] = kk * fn + t1
            out[:, col + 3] = kk * fn - t2
            out[:, col + 4] = kk * fn + t2
    return out * ctx.cone_scale


def _tangent_basis(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    seed = np.array([1.0, 0.0, 0.0])
    if abs(n @ seed) > 0.9:
        seed = np.array([0.0, 1.0, 0.0])
    e1 = seed - (seed @ n) * n
    e1 = e1 / np.linalg.norm(e1)
    return e1, np.cross(n, e1)


def _reach_rows(X: np.ndarray, ctx) -> np.ndarray:
    """(B, n_c * 2) stance leg-length window rows [l - l_min, l_max - l].

    These keep the body out of the fold-over region where the leg Jacobian
    loses rank and the contact forces become violently state-sensitive.
    """
    B = X.shape[0]
    n_c = ctx.n_contacts
    out = np.zeros((B, n_c * 2))
    if n_c == 0:
        return out
    xfull = np.tile(ctx.x_template, (B, 1))
    xfull[:, ctx.state_free_idx] = X
    p, eul = xfull[:, 0:3], xfull[:, 3:6]
    R = _rotations(eul)[0]
    for j in range(n_c):
        r = _mv(R.transpose(0, 2, 1), ctx.anchors[j] - p) - ctx.stance_hips[j]
        length = np.linalg.norm(r, axis=1)
        out[:, 2 * j] = length - ctx.l_min_eff
        out[:, 2 * j + 1] = ctx.l_max_eff - length
    return out


def _phase_components(
    Xs: np.ndarray, Us: np.ndarray, ctx
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Cost/eq/ineq for K trajectories at once.

    ``Xs`` is (K, n, nx), ``Us`` is (K, n, nu) in decision units (controls
    divided by their limits). All K·n node points go through one batched
    dynamics call (likewise the K·(n-1) midpoints), which is what makes
    finite-difference merit gradients affordable in pure numpy.
    """
    K, n, nx = Xs.shape
    Us = Us * ctx.u_limits
    nu = Us.shape[2]
    h = np.diff(ctx.times)

    chi_nodes = np.tile(ctx.chi[0::2], (K, 1, 1))
    f_nodes, lam_nodes = eval_dynamics(
        Xs.reshape(K * n, nx), Us.reshape(K * n, nu), chi_nodes, ctx
    )
    f_nodes = f_nodes.reshape(K, n, nx)
    Xm = 0.5 * (Xs[:, :-1] + Xs[:, 1:]) + (h[None, :, None] / 8.0) * (
        f_nodes[:, :-1] - f_nodes[:, 1:]
    )
    Um = 0.5 * (Us[:, :-1] + Us[:, 1:])
    chi_mids = np.tile(ctx.chi[1::2], (K, 1, 1))
    f_mids, _ = eval_dynamics(
        Xm.reshape(K * (n - 1), nx), Um.reshape(K * (n - 1), nu), chi_mids, ctx
    )
    slope = (1.5 / h)[None, :, None] * (Xs[:, 1:] - Xs[:, :-1]) - 0.25 * (
        f_nodes[:, :-1] + f_nodes[:, 1:]
    )
    # scaled by h this is 1.5x the Simpson integral residual, which keeps the
    # defect rows commensurate with the cone rows under a shared penalty
    defects = h[None, :, None] * (slope - f_mids.reshape(K, n - 1, nx))

    eq = [defects.reshape(K, -1), Xs[:, 0] - ctx.x0_bc]
    if ctx.xf_bc is not None:
        eq.append(Xs[:, -1] - ctx.xf_bc)
    eq = np.concatenate(eq, axis=1)

    cones = _cone_rows(lam_nodes, ctx).reshape(K, n, -1)
    reach = _reach_rows(Xs.reshape(K * n, nx), ctx).reshape(K, n, -1)
    ineq = np.concatenate([cones, reach], axis=2).reshape(K, -1)

    node_cost = _node_cost(Us.reshape(K * n, nu), ctx).reshape(K, n)
    cost = np.sum(0.5 * h * (node_cost[:, :-1] + node_cost[:, 1:]), axis=1)
    return cost, eq, ineq, lam_nodes.reshape(K, n, ctx.n_contacts, 3)


def phase_eval(Y: np.ndarray, ctx) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Cost, equalities, inequalities, and node contact forces for a phase."""
    X, U = _unpack(np.asarray(Y, dtype=float), ctx)
    cost, eq, ineq, lam = _phase_components(X[None], U[None], ctx)
    return float(cost[0]), eq[0], ineq[0], lam[0]


def _merit_from_components(cost, eq, ineq, mu_eq, mu_in, rho):
    val = np.array(cost, dtype=float, copy=True)
    if eq.shape[-1]:
        val += eq @ (-mu_eq) + 0.5 * rho * np.einsum("...i,...i->...", eq, eq)
    if ineq.shape[-1]:
        t = np.maximum(0.0, mu_in - rho * ineq)
        val += (np.einsum("...i,...i->...", t, t) - mu_in @ mu_in) / (2.0 * rho)
    return val


def al_merit(Y, ctx, mu_eq, mu_in, rho) -> float:
    cost, eq, ineq, _ = phase_eval(Y, ctx)
    return float(_merit_from_components(cost, eq, ineq, mu_eq, mu_in, rho))


def al_merit_and_grad(
    Y, ctx, mu_eq, mu_in, rho, fd_step: float = 1e-6
) -> tuple[float, np.ndarray]:
    """Merit and central-difference gradient from one batched evaluation.

    All 2m perturbations plus the base point ride a single dynamics batch.
    Falls back to a per-coordinate loop (with large-merit substitution) if a
    perturbed point trips a dynamics guard, so the solver still gets usable
    descent information at the edge of the valid region.
    """
    Y = np.asarray(Y, dtype=float)
    m = Y.size
    steps = fd_step * np.maximum(1.0, np.abs(Y))
    Ys = np.tile(Y, (2 * m + 1, 1))
    Ys[:m, :][np.diag_indices(m)] += steps
    Ys[m : 2 * m, :][np.diag_indices(m)] -= steps
    n, nx, nu = ctx.n_nodes, ctx.nx, ctx.nu
    Xs = Ys[:, : n * nx].reshape(2 * m + 1, n, nx)
    Us = Ys[:, n * nx :].reshape(2 * m + 1, n, nu)
    try:
        cost, eq, ineq, _ = _phase_components(Xs, Us, ctx)
    except (FloatingPointError, SingularKKT, np.linalg.LinAlgError):
        try:
            merit = al_merit(Y, ctx, mu_eq, mu_in, rho)
        except (FloatingPointError, SingularKKT, np.linalg.LinAlgError):
            merit = _BAD_MERIT
        return merit, _merit_grad_loop(Y, ctx, mu_eq, mu_in, rho, steps)
    merits = _merit_from_components(cost, eq, ineq, mu_eq, mu_in, rho)
    grad = (merits[:m] - merits[m : 2 * m]) / (2.0 * steps)
    return float(merits[2 * m]), grad


def al_merit_grad(Y, ctx, mu_eq, mu_in, rho, fd_step: float = 1e-6) -> np.ndarray:
    return al_merit_and_grad(Y, ctx, mu_eq, mu_in, rho, fd_step)[1]


_BAD_MERIT = 1e12


def _merit_grad_loop(Y, ctx, mu_eq, mu_in, rho, steps) -> np.ndarray:
    grad = np.zeros_like(Y)
    for i in range(Y.size):
        vals = np.empty(2)
        for k, sgn in enumerate((1.0, -1.0)):
            Yp = Y.copy()
            Yp[i] += sgn * steps[i]
            try:
                vals[k] = al_merit(Yp, ctx, mu_eq, mu_in, rho)
            except (FloatingPointError, SingularKKT, np.linalg.LinAlgError):
                vals[k] = _BAD_MERIT
        grad[i] = (vals[0] - vals[1]) / (2.0 * steps[i])
    return grad
