# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twin of :mod:`wairsim.fastpath.pyref`.

Same entry points, same guards, same row layouts; the per-point dynamics and
the merit reductions run as C loops over stack-allocated fixed-size arrays
instead of batched numpy temporaries. Any numeric divergence from the
reference implementation is a bug (cross-backend agreement is tested).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport asin, atan2, cos, fabs, sin, sqrt
from libc.string cimport memset

from ..errors import SingularKKT

cnp.import_array()

NAME = "compiled"

_BAD_MERIT = 1e12

cdef double PI_HALF = 1.5707963267948966

DEF MAX_NODES = 64
DEF MAX_NX = 12
DEF MAX_NU = 6


# ---------------------------------------------------------------------------
# small dense solvers (stack buffers, row-major)


cdef int _chol_factor(double* A, int n) nogil:
    """In-place lower Cholesky; returns -1 if a pivot is not positive."""
    cdef int i, j, p
    cdef double s
    for j in range(n):
        s = A[j * n + j]
        for p in range(j):
            s -= A[j * n + p] * A[j * n + p]
        if s <= 0.0:
            return -1
        A[j * n + j] = sqrt(s)
        for i in range(j + 1, n):
            s = A[i * n + j]
            for p in range(j):
                s -= A[i * n + p] * A[j * n + p]
            A[i * n + j] = s / A[j * n + j]
    return 0


cdef void _chol_solve(double* L, double* b, int n) nogil:
    """Solve L L^T x = b in place given the factor from _chol_factor."""
    cdef int i, p
    cdef double s
    for i in range(n):
        s = b[i]
        for p in range(i):
            s -= L[i * n + p] * b[p]
        b[i] = s / L[i * n + i]
    for i in range(n - 1, -1, -1):
        s = b[i]
        for p in range(i + 1, n):
            s -= L[p * n + i] * b[p]
        b[i] = s / L[i * n + i]


cdef int _solve3(double* A, double* b) nogil:
    """3x3 Gaussian elimination with partial pivoting; solution into b."""
    cdef double M[9]
    cdef double x[3]
    cdef int i, j, p, piv
    cdef double best, f
    for i in range(9):
        M[i] = A[i]
    for i in range(3):
        x[i] = b[i]
    for p in range(3):
        piv = p
        best = fabs(M[p * 3 + p])
        for i in range(p + 1, 3):
            if fabs(M[i * 3 + p]) > best:
                best = fabs(M[i * 3 + p])
                piv = i
        if best == 0.0:
            return -1
        if piv != p:
            for j in range(3):
                f = M[p * 3 + j]
                M[p * 3 + j] = M[piv * 3 + j]
                M[piv * 3 + j] = f
            f = x[p]
            x[p] = x[piv]
            x[piv] = f
        for i in range(p + 1, 3):
            f = M[i * 3 + p] / M[p * 3 + p]
            for j in range(p, 3):
                M[i * 3 + j] -= f * M[p * 3 + j]
            x[i] -= f * x[p]
    for p in range(2, -1, -1):
        f = x[p]
        for j in range(p + 1, 3):
            f -= M[p * 3 + j] * x[j]
        x[p] = f / M[p * 3 + p]
    for i in range(3):
        b[i] = x[i]
    return 0


cdef inline void _cross(double* a, double* b, double* out) nogil:
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


# ---------------------------------------------------------------------------
# context view


cdef class _CtxView:
    """Typed snapshot of a PhaseContext for the C kernels."""

    cdef double[::1] x_template
    cdef double[::1] gravity
    cdef double[::1] mu_eff
    cdef double[::1] times
    cdef double[::1] squeeze
    cdef double[::1] x0_bc
    cdef double[::1] xf_bc
    cdef double[::1] w_cost
    cdef double[::1] u_limits
    cdef double[:, ::1] anchors
    cdef double[:, ::1] hips
    cdef double[:, ::1] normals
    cdef double[:, ::1] inertia
    cdef double[:, :, ::1] chi
    cdef cnp.int64_t[::1] sfi
    cdef cnp.int64_t[::1] ufi
    cdef cnp.int64_t[::1] idx
    cdef cnp.int64_t[::1] rows
    cdef double mass, n_min_eff, cone_smoothing, cone_scale
    cdef double l_min_eff, l_max_eff
    cdef int n_c, n_r, k, nx, nu, n_nodes, cone_n, pyramid, has_xf

    def __init__(self, ctx):
        self.x_template = np.ascontiguousarray(ctx.x_template, dtype=np.float64)
        self.gravity = np.ascontiguousarray(ctx.gravity, dtype=np.float64)
        self.mu_eff = np.ascontiguousarray(ctx.mu_eff, dtype=np.float64)
        self.times = np.ascontiguousarray(ctx.times, dtype=np.float64)
        self.anchors = np.ascontiguousarray(ctx.anchors, dtype=np.float64)
        self.hips = np.ascontiguousarray(ctx.stance_hips, dtype=np.float64)
        self.normals = np.ascontiguousarray(ctx.normals, dtype=np.float64)
        self.inertia = np.ascontiguousarray(ctx.inertia, dtype=np.float64)
        self.chi = np.ascontiguousarray(ctx.chi, dtype=np.float64)
        self.sfi = np.ascontiguousarray(ctx.state_free_idx, dtype=np.int64)
        self.ufi = np.ascontiguousarray(ctx.u_free_idx, dtype=np.int64)
        self.idx = np.ascontiguousarray(ctx.body_idx, dtype=np.int64)
        self.rows = np.ascontiguousarray(ctx.foot_rows, dtype=np.int64)
        self.x0_bc = np.ascontiguousarray(ctx.x0_bc, dtype=np.float64)
        if ctx.xf_bc is not None:
            self.xf_bc = np.ascontiguousarray(ctx.xf_bc, dtype=np.float64)
            self.has_xf = 1
        else:
            self.xf_bc = np.zeros(self.x0_bc.shape[0])
            self.has_xf = 0
        if ctx.squeeze is not None:
            self.squeeze = np.ascontiguousarray(ctx.squeeze, dtype=np.float64)
        else:
            self.squeeze = np.zeros(1)
        self.w_cost = np.ascontiguousarray(
            np.concatenate([ctx.w_force, ctx.w_moment]), dtype=np.float64
        )
        self.u_limits = np.ascontiguousarray(ctx.u_limits, dtype=np.float64)
        self.mass = float(ctx.mass)
        self.n_min_eff = float(ctx.n_min_eff)
        self.cone_smoothing = float(ctx.cone_smoothing)
        self.cone_scale = float(ctx.cone_scale)
        self.l_min_eff = float(ctx.l_min_eff)
        self.l_max_eff = float(ctx.l_max_eff)
        self.n_c = int(ctx.n_contacts)
        self.n_r = <int> self.rows.shape[0]
        self.k = <int> self.idx.shape[0]
        self.nx = int(ctx.nx)
        self.nu = int(ctx.nu)
        self.n_nodes = int(ctx.n_nodes)
        self.cone_n = int(ctx.n_cone_rows)
        self.pyramid = 0 if ctx.cone_form == "exact" else 1
        if self.nx > MAX_NX or self.nu > MAX_NU:
            raise ValueError("state or control dimension beyond compiled limits")


# ---------------------------------------------------------------------------
# point dynamics kernel


cdef int _dyn_point(
    _CtxView C,
    double* xrow,      # nx reduced state
    double* urow,      # nu physical controls
    double* chirow,    # n_c * 3 stance joint accelerations
    double* xdot_out,  # nx
    double* lam_out,   # n_c * 3 world frame
) except -1:
    cdef double xfull[12]
    cdef double wrench[6]
    cdef double R[9]
    cdef double E[9]
    cdef double dE1[9]
    cdef double dE2[9]
    cdef double Edot[9]
    cdef double IB[9]
    cdef double IE[9]
    cdef double omega[3]
    cdef double Iomega[3]
    cdef double M_rot[9]
    cdef double h_rot[3]
    cdef double u_gen[6]
    cdef double h6[6]
    cdef double M_fac[36]
    cdef double rhs1[6]
    cdef double vdot6[6]
    cdef double A_red[36]     # (n_c*n_r) x k, both <= 6
    cdef double b_red[6]
    cdef double Minv_rhs1[6]
    cdef double Minv_AT[36]   # k x (n_c*n_r)
    cdef double G[36]
    cdef double rhs2[6]
    cdef double lam_flat[6]
    cdef double colbuf[6]
    cdef double r[3]
    cdef double lf[3]
    cdef double D[9]
    cdef double Ddot[9]
    cdef double cvec[3]
    cdef double fvb[3]
    cdef double dq[3]
    cdef double c_dot[3]
    cdef double kappa[3]
    cdef double tmp3[3]
    cdef double tmp3b[3]
    cdef double A_full[18]    # 3 x 6
    cdef double skew_c[9]
    cdef double Rskew[9]
    cdef double RskewE[9]
    cdef double erate[3]
    cdef double v[3]
    cdef double xdot_full[12]
    cdef double sdot, s
    cdef int i, j, a, b, p, jj, m_rows, kk
    cdef double yaw, pitch, roll, cy, sy, ct, st, cr, sr
    cdef double cg, sg, cp, sp
    cdef double length, sin_g, gamma, phi

    for i in range(12):
        xfull[i] = C.x_template[i]
    for i in range(C.nx):
        xfull[C.sfi[i]] = xrow[i]
    pitch = xfull[4]
    if fabs(pitch) > PI_HALF - 1e-6:
        raise FloatingPointError("pitch at gimbal limit during evaluation")

    for i in range(6):
        wrench[i] = 0.0
    for i in range(C.nu):
        wrench[C.ufi[i]] = urow[i]

    yaw = xfull[3]
    roll = xfull[5]
    cy = cos(yaw); sy = sin(yaw)
    ct = cos(pitch); st = sin(pitch)
    cr = cos(roll); sr = sin(roll)

    R[0] = cy * ct; R[1] = cy * st * sr - sy * cr; R[2] = cy * st * cr + sy * sr
    R[3] = sy * ct; R[4] = sy * st * sr + cy * cr; R[5] = sy * st * cr - cy * sr
    R[6] = -st;     R[7] = ct * sr;               R[8] = ct * cr

    memset(E, 0, sizeof(E))
    E[0] = -st; E[2] = 1.0
    E[3] = ct * sr; E[4] = cr
    E[6] = ct * cr; E[7] = -sr

    # E partials w.r.t. pitch (dE1) and roll (dE2); the yaw partial is zero
    memset(dE1, 0, sizeof(dE1))
    dE1[0] = -ct
    dE1[3] = -st * sr
    dE1[6] = -st * cr
    memset(dE2, 0, sizeof(dE2))
    dE2[3] = ct * cr
    dE2[4] = -sr
    dE2[6] = -ct * sr
    dE2[7] = -cr

    for i in range(3):
        v[i] = xfull[6 + i]
        erate[i] = xfull[9 + i]

    for i in range(9):
        Edot[i] = dE1[i] * erate[1] + dE2[i] * erate[2]

    for i in range(3):
        omega[i] = E[i * 3] * erate[0] + E[i * 3 + 1] * erate[1] + E[i * 3 + 2] * erate[2]
    for i in range(3):
        for j in range(3):
            IB[i * 3 + j] = C.inertia[i, j]
    for i in range(3):
        Iomega[i] = IB[i * 3] * omega[0] + IB[i * 3 + 1] * omega[1] + IB[i * 3 + 2] * omega[2]

    # M_rot = E^T I E
    for i in range(3):
        for j in range(3):
            IE[i * 3 + j] = IB[i * 3] * E[j] + IB[i * 3 + 1] * E[3 + j] + IB[i * 3 + 2] * E[6 + j]
    for i in range(3):
        for j in range(3):
            M_rot[i * 3 + j] = E[i] * IE[j] + E[3 + i] * IE[3 + j] + E[6 + i] * IE[6 + j]

    # h_rot = E^T I (Edot erate) + Edot^T Iomega - W
    for i in range(3):
        tmp3[i] = Edot[i * 3] * erate[0] + Edot[i * 3 + 1] * erate[1] + Edot[i * 3 + 2] * erate[2]
    for i in range(3):
        tmp3b[i] = IB[i * 3] * tmp3[0] + IB[i * 3 + 1] * tmp3[1] + IB[i * 3 + 2] * tmp3[2]
    for i in range(3):
        h_rot[i] = E[i] * tmp3b[0] + E[3 + i] * tmp3b[1] + E[6 + i] * tmp3b[2]
        h_rot[i] += Edot[i] * Iomega[0] + Edot[3 + i] * Iomega[1] + Edot[6 + i] * Iomega[2]
    # W_k = (dE_k erate) . Iomega; the yaw term vanishes
    for i in range(3):
        tmp3[i] = dE1[i * 3] * erate[0] + dE1[i * 3 + 1] * erate[1] + dE1[i * 3 + 2] * erate[2]
    h_rot[1] -= tmp3[0] * Iomega[0] + tmp3[1] * Iomega[1] + tmp3[2] * Iomega[2]
    for i in range(3):
        tmp3[i] = dE2[i * 3] * erate[0] + dE2[i * 3 + 1] * erate[1] + dE2[i * 3 + 2] * erate[2]
    h_rot[2] -= tmp3[0] * Iomega[0] + tmp3[1] * Iomega[1] + tmp3[2] * Iomega[2]

    for i in range(3):
        u_gen[i] = R[i * 3] * wrench[0] + R[i * 3 + 1] * wrench[1] + R[i * 3 + 2] * wrench[2]
        u_gen[3 + i] = E[i] * wrench[3] + E[3 + i] * wrench[4] + E[6 + i] * wrench[5]
        h6[i] = -C.mass * C.gravity[i]
        h6[3 + i] = h_rot[i]

    kk = C.k
    for a in range(kk):
        for b in range(kk):
            i = <int> C.idx[a]
            j = <int> C.idx[b]
            if i < 3 and j < 3:
                M_fac[a * kk + b] = C.mass if i == j else 0.0
            elif i >= 3 and j >= 3:
                M_fac[a * kk + b] = M_rot[(i - 3) * 3 + (j - 3)]
            else:
                M_fac[a * kk + b] = 0.0
        rhs1[a] = u_gen[C.idx[a]] - h6[C.idx[a]]

    memset(vdot6, 0, sizeof(vdot6))
    for i in range(C.n_c * 3):
        lam_out[i] = 0.0

    if _chol_factor(M_fac, kk) != 0:
        raise SingularKKT("reduced mass matrix not positive definite")

    if C.n_c == 0:
        for a in range(kk):
            Minv_rhs1[a] = rhs1[a]
        _chol_solve(M_fac, Minv_rhs1, kk)
        for a in range(kk):
            vdot6[C.idx[a]] = Minv_rhs1[a]
    else:
        m_rows = C.n_c * C.n_r
        for jj in range(C.n_c):
            # leg IK from the body pose to the anchor
            for i in range(3):
                tmp3[i] = C.anchors[jj, i] - xfull[i]
            for i in range(3):
                r[i] = R[i] * tmp3[0] + R[3 + i] * tmp3[1] + R[6 + i] * tmp3[2]
                r[i] -= C.hips[jj, i]
            length = sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2])
            if length < 1e-9:
                raise FloatingPointError("foot target at hip")
            sin_g = r[1] / length
            if sin_g > 1.0:
                sin_g = 1.0
            elif sin_g < -1.0:
                sin_g = -1.0
            gamma = asin(sin_g)
            phi = atan2(-r[0], -r[2])

            cg = cos(gamma); sg = sin(gamma)
            cp = cos(phi); sp = sin(phi)
            lf[0] = -length * cg * sp
            lf[1] = length * sg
            lf[2] = -length * cg * cp
            D[0] = -length * cg * cp; D[1] = length * sg * sp;  D[2] = -cg * sp
            D[3] = 0.0;               D[4] = length * cg;       D[5] = sg
            D[6] = length * cg * sp;  D[7] = length * sg * cp;  D[8] = -cg * cp

            for i in range(3):
                cvec[i] = C.hips[jj, i] + lf[i]

            # pin jacobian rows: [I3 | -R skew(c) E]
            skew_c[0] = 0.0;      skew_c[1] = -cvec[2]; skew_c[2] = cvec[1]
            skew_c[3] = cvec[2];  skew_c[4] = 0.0;      skew_c[5] = -cvec[0]
            skew_c[6] = -cvec[1]; skew_c[7] = cvec[0];  skew_c[8] = 0.0
            for i in range(3):
                for j in range(3):
                    Rskew[i * 3 + j] = (
                        R[i * 3] * skew_c[j]
                        + R[i * 3 + 1] * skew_c[3 + j]
                        + R[i * 3 + 2] * skew_c[6 + j]
                    )
            for i in range(3):
                for j in range(3):
                    RskewE[i * 3 + j] = (
                        Rskew[i * 3] * E[j]
                        + Rskew[i * 3 + 1] * E[3 + j]
                        + Rskew[i * 3 + 2] * E[6 + j]
                    )
            memset(A_full, 0, sizeof(A_full))
            for i in range(3):
                A_full[i * 6 + i] = 1.0
                for j in range(3):
                    A_full[i * 6 + 3 + j] = -RskewE[i * 3 + j]

            # stance joint rates holding the foot: D dq = -(R^T v + omega x c)
            for i in range(3):
                fvb[i] = R[i] * v[0] + R[3 + i] * v[1] + R[6 + i] * v[2]
            _cross(omega, cvec, tmp3)
            for i in range(3):
                dq[i] = -(fvb[i] + tmp3[i])
            if _solve3(D, dq) != 0:
                raise SingularKKT("stance leg jacobian is singular")
            for i in range(3):
                c_dot[i] = D[i * 3] * dq[0] + D[i * 3 + 1] * dq[1] + D[i * 3 + 2] * dq[2]

            # Jacobian rate along dq
            Ddot[0] = (length * cg * sp) * dq[0] + (length * sg * cp) * dq[1] + (-cg * cp) * dq[2]
            Ddot[1] = (length * sg * cp) * dq[0] + (length * cg * sp) * dq[1] + (sg * sp) * dq[2]
            Ddot[2] = (-cg * cp) * dq[0] + (sg * sp) * dq[1]
            Ddot[3] = 0.0
            Ddot[4] = (-length * sg) * dq[1] + cg * dq[2]
            Ddot[5] = cg * dq[1]
            Ddot[6] = (length * cg * cp) * dq[0] + (-length * sg * sp) * dq[1] + (cg * sp) * dq[2]
            Ddot[7] = (-length * sg * sp) * dq[0] + (length * cg * cp) * dq[1] + (sg * cp) * dq[2]
            Ddot[8] = (cg * sp) * dq[0] + (sg * cp) * dq[1]

            _cross(omega, cvec, tmp3)
            _cross(omega, tmp3, kappa)          # omega x (omega x c)
            for i in range(3):
                tmp3[i] = Edot[i * 3] * erate[0] + Edot[i * 3 + 1] * erate[1] + Edot[i * 3 + 2] * erate[2]
            _cross(tmp3, cvec, tmp3b)
            for i in range(3):
                kappa[i] += tmp3b[i]
            _cross(omega, c_dot, tmp3)
            for i in range(3):
                kappa[i] += 2.0 * tmp3[i]
            for i in range(3):
                kappa[i] += Ddot[i * 3] * dq[0] + Ddot[i * 3 + 1] * dq[1] + Ddot[i * 3 + 2] * dq[2]

            # b = R (kappa + D chi)
            for i in range(3):
                tmp3[i] = kappa[i] + (
                    D[i * 3] * chirow[jj * 3]
                    + D[i * 3 + 1] * chirow[jj * 3 + 1]
                    + D[i * 3 + 2] * chirow[jj * 3 + 2]
                )
            for i in range(3):
                tmp3b[i] = R[i * 3] * tmp3[0] + R[i * 3 + 1] * tmp3[1] + R[i * 3 + 2] * tmp3[2]

            for i in range(C.n_r):
                p = <int> C.rows[i]
                for a in range(kk):
                    A_red[(jj * C.n_r + i) * kk + a] = A_full[p * 6 + C.idx[a]]
                b_red[jj * C.n_r + i] = tmp3b[p]

        for a in range(kk):
            Minv_rhs1[a] = rhs1[a]
        _chol_solve(M_fac, Minv_rhs1, kk)
        for i in range(m_rows):
            for a in range(kk):
                colbuf[a] = A_red[i * kk + a]
            _chol_solve(M_fac, colbuf, kk)
            for a in range(kk):
                Minv_AT[a * m_rows + i] = colbuf[a]
        for i in range(m_rows):
            for j in range(m_rows):
                s = 0.0
                for a in range(kk):
                    s += A_red[i * kk + a] * Minv_AT[a * m_rows + j]
                G[i * m_rows + j] = s
            s = 0.0
            for a in range(kk):
                s += A_red[i * kk + a] * Minv_rhs1[a]
            rhs2[i] = -b_red[i] - s

        if C.n_c == 1:
            for i in range(m_rows):
                lam_flat[i] = rhs2[i]
            if _chol_factor(G, m_rows) != 0:
                raise SingularKKT("contact Schur complement not positive definite")
            _chol_solve(G, lam_flat, m_rows)
        elif C.n_c == 2:
            # project out the squeeze null direction, then solve the
            # rank-completed system (minimum-norm contact forces)
            sdot = 0.0
            for i in range(m_rows):
                sdot += rhs2[i] * C.squeeze[i]
            for i in range(m_rows):
                lam_flat[i] = rhs2[i] - sdot * C.squeeze[i]
                for j in range(m_rows):
                    G[i * m_rows + j] += C.squeeze[i] * C.squeeze[j]
            if _chol_factor(G, m_rows) != 0:
                raise SingularKKT("contact Schur complement not positive definite")
            _chol_solve(G, lam_flat, m_rows)
        else:
            raise SingularKKT("phase evaluator supports at most two stance feet")

        for a in range(kk):
            s = Minv_rhs1[a]
            for i in range(m_rows):
                s += Minv_AT[a * m_rows + i] * lam_flat[i]
            vdot6[C.idx[a]] = s
        for jj in range(C.n_c):
            for i in range(C.n_r):
                lam_out[jj * 3 + C.rows[i]] = lam_flat[jj * C.n_r + i]

    for i in range(3):
        xdot_full[i] = v[i]
        xdot_full[3 + i] = erate[i]
    for i in range(6):
        xdot_full[6 + i] = vdot6[i]
    for i in range(C.nx):
        xdot_out[i] = xdot_full[C.sfi[i]]
    return 0


# ---------------------------------------------------------------------------
# row assembly


cdef void _cone_rows_point(_CtxView C, double* lam, double* out) nogil:
    cdef int jj, col, i
    cdef double fn, t1, t2, slope_k, nrm, dot_
    cdef double ft[3]
    cdef double e1[3]
    cdef double e2[3]
    cdef double seed[3]
    for jj in range(C.n_c):
        fn = (
            lam[jj * 3] * C.normals[jj, 0]
            + lam[jj * 3 + 1] * C.normals[jj, 1]
            + lam[jj * 3 + 2] * C.normals[jj, 2]
        )
        for i in range(3):
            ft[i] = lam[jj * 3 + i] - fn * C.normals[jj, i]
        col = jj * C.cone_n
        if C.pyramid == 0:
            out[col] = (fn - C.n_min_eff) * C.cone_scale
            out[col + 1] = (
                C.mu_eff[jj] * fn
                - sqrt(ft[0] * ft[0] + ft[1] * ft[1] + ft[2] * ft[2]
                       + C.cone_smoothing * C.cone_smoothing)
            ) * C.cone_scale
        else:
            seed[0] = 1.0; seed[1] = 0.0; seed[2] = 0.0
            if fabs(C.normals[jj, 0]) > 0.9:
                seed[0] = 0.0; seed[1] = 1.0
            dot_ = (
                seed[0] * C.normals[jj, 0]
                + seed[1] * C.normals[jj, 1]
                + seed[2] * C.normals[jj, 2]
            )
            for i in range(3):
                e1[i] = seed[i] - dot_ * C.normals[jj, i]
            nrm = sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2])
            for i in range(3):
                e1[i] /= nrm
            e2[0] = C.normals[jj, 1] * e1[2] - C.normals[jj, 2] * e1[1]
            e2[1] = C.normals[jj, 2] * e1[0] - C.normals[jj, 0] * e1[2]
            e2[2] = C.normals[jj, 0] * e1[1] - C.normals[jj, 1] * e1[0]
            t1 = ft[0] * e1[0] + ft[1] * e1[1] + ft[2] * e1[2]
            t2 = ft[0] * e2[0] + ft[1] * e2[1] + ft[2] * e2[2]
            slope_k = C.mu_eff[jj] / sqrt(2.0)
            out[col] = (fn - C.n_min_eff) * C.cone_scale
            out[col + 1] = (slope_k * fn - t1) * C.cone_scale
            out[col + 2] = (slope_k * fn + t1) * C.cone_scale
            out[col + 3] = (slope_k * fn - t2) * C.cone_scale
            out[col + 4] = (slope_k * fn + t2) * C.cone_scale


cdef void _reach_rows_point(_CtxView C, double* xrow, double* out) nogil:
    cdef double xfull[12]
    cdef double R[9]
    cdef double r[3]
    cdef double tmp3[3]
    cdef int i, jj
    cdef double yaw, pitch, roll, cy, sy, ct, st, cr, sr, length
    for i in range(12):
        xfull[i] = C.x_template[i]
    for i in range(C.nx):
        xfull[C.sfi[i]] = xrow[i]
    yaw = xfull[3]; pitch = xfull[4]; roll = xfull[5]
    cy = cos(yaw); sy = sin(yaw)
    ct = cos(pitch); st = sin(pitch)
    cr = cos(roll); sr = sin(roll)
    R[0] = cy * ct; R[1] = cy * st * sr - sy * cr; R[2] = cy * st * cr + sy * sr
    R[3] = sy * ct; R[4] = sy * st * sr + cy * cr; R[5] = sy * st * cr - cy * sr
    R[6] = -st;     R[7] = ct * sr;               R[8] = ct * cr
    for jj in range(C.n_c):
        for i in range(3):
            tmp3[i] = C.anchors[jj, i] - xfull[i]
        for i in range(3):
            r[i] = R[i] * tmp3[0] + R[3 + i] * tmp3[1] + R[6 + i] * tmp3[2]
            r[i] -= C.hips[jj, i]
        length = sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2])
        out[2 * jj] = length - C.l_min_eff
        out[2 * jj + 1] = C.l_max_eff - length


cdef double _node_cost_point(_CtxView C, double* urow) nogil:
    cdef double s = 0.0
    cdef int i
    for i in range(C.nu):
        s += C.w_cost[C.ufi[i]] * urow[i] * urow[i]
    return 0.5 * s


# ---------------------------------------------------------------------------
# public API (mirrors pyref)


def eval_dynamics(X, U, chi_rows, ctx):
    """Reduced-state dynamics and world contact forces for a batch of points."""
    cdef _CtxView C = _CtxView(ctx)
    X_arr = np.ascontiguousarray(np.atleast_2d(np.asarray(X, dtype=np.float64)))
    U_arr = np.ascontiguousarray(np.atleast_2d(np.asarray(U, dtype=np.float64)))
    cdef Py_ssize_t B = X_arr.shape[0]
    if C.n_c > 0:
        chi_arr = np.ascontiguousarray(
            np.asarray(chi_rows, dtype=np.float64).reshape(B, C.n_c, 3)
        )
    else:
        chi_arr = np.zeros((B, 0, 3))
    cdef double[:, ::1] Xv = X_arr
    cdef double[:, ::1] Uv = U_arr
    cdef double[:, :, ::1] chiv = chi_arr
    out_x = np.empty((B, C.nx))
    out_l = np.zeros((B, C.n_c, 3))
    cdef double[:, ::1] ox = out_x
    cdef double[:, :, ::1] ol = out_l
    cdef double lam_buf[6]
    cdef double chi_buf[6]
    cdef Py_ssize_t b
    cdef int i
    for b in range(B):
        for i in range(C.n_c * 3):
            chi_buf[i] = chiv[b, i // 3, i % 3]
        _dyn_point(C, &Xv[b, 0], &Uv[b, 0], chi_buf, &ox[b, 0], lam_buf)
        for i in range(C.n_c * 3):
            ol[b, i // 3, i % 3] = lam_buf[i]
    return out_x, out_l


cdef int _components_kernel(
    _CtxView C,
    double[:, :, ::1] Xs,      # (K, n, nx)
    double[:, :, ::1] Us,      # (K, n, nu) in decision units
    double[::1] cost,          # (K,)
    double[:, ::1] eq,         # (K, n_eq)
    double[:, ::1] ineq,       # (K, n_ineq)
    double[:, :, :, ::1] lam,  # (K, n, n_c, 3)
) except -1:
    cdef Py_ssize_t K = Xs.shape[0]
    cdef int n = C.n_nodes
    cdef int nx = C.nx
    cdef int nu = C.nu
    cdef int per_node = C.n_c * (C.cone_n + 2)
    cdef int i, a, jj, base
    cdef Py_ssize_t kk
    cdef double h, slope
    cdef double f_nodes[768]           # MAX_NODES * MAX_NX
    cdef double u_phys[384]            # MAX_NODES * MAX_NU
    cdef double node_cost[64]          # MAX_NODES
    cdef double lam_node[6]
    cdef double lam_mid[6]
    cdef double xm[12]
    cdef double um[6]
    cdef double fm[12]
    cdef double chi_buf[6]
    if n > MAX_NODES:
        raise ValueError("compiled backend supports at most 64 nodes per phase")

    for kk in range(K):
        for i in range(n):
            for a in range(nu):
                u_phys[i * nu + a] = Us[kk, i, a] * C.u_limits[a]
        # node pass: dynamics, contact force rows, leg reach rows, cost
        for i in range(n):
            for a in range(C.n_c * 3):
                chi_buf[a] = C.chi[2 * i, a // 3, a % 3]
            _dyn_point(
                C, &Xs[kk, i, 0], &u_phys[i * nu], chi_buf,
                &f_nodes[i * nx], lam_node,
            )
            for a in range(C.n_c):
                for jj in range(3):
                    lam[kk, i, a, jj] = lam_node[a * 3 + jj]
            if per_node > 0:
                _cone_rows_point(C, lam_node, &ineq[kk, i * per_node])
                _reach_rows_point(
                    C, &Xs[kk, i, 0], &ineq[kk, i * per_node + C.n_c * C.cone_n]
                )
            node_cost[i] = _node_cost_point(C, &u_phys[i * nu])

        # interval pass: Hermite midpoint states, Simpson defects
        for i in range(n - 1):
            h = C.times[i + 1] - C.times[i]
            for a in range(C.n_c * 3):
                chi_buf[a] = C.chi[2 * i + 1, a // 3, a % 3]
            for a in range(nx):
                xm[a] = 0.5 * (Xs[kk, i, a] + Xs[kk, i + 1, a]) + (h / 8.0) * (
                    f_nodes[i * nx + a] - f_nodes[(i + 1) * nx + a]
                )
            for a in range(nu):
                um[a] = 0.5 * (u_phys[i * nu + a] + u_phys[(i + 1) * nu + a])
            _dyn_point(C, xm, um, chi_buf, fm, lam_mid)
            for a in range(nx):
                slope = (1.5 / h) * (Xs[kk, i + 1, a] - Xs[kk, i, a]) - 0.25 * (
                    f_nodes[i * nx + a] + f_nodes[(i + 1) * nx + a]
                )
                eq[kk, i * nx + a] = h * (slope - fm[a])

        base = (n - 1) * nx
        for a in range(nx):
            eq[kk, base + a] = Xs[kk, 0, a] - C.x0_bc[a]
        if C.has_xf:
            for a in range(nx):
                eq[kk, base + nx + a] = Xs[kk, n - 1, a] - C.xf_bc[a]

        h = 0.0
        for i in range(n - 1):
            h += 0.5 * (C.times[i + 1] - C.times[i]) * (node_cost[i] + node_cost[i + 1])
        cost[kk] = h
    return 0


def _phase_components(Xs, Us, ctx):
    """Cost/eq/ineq/contact forces for a batch of K candidate trajectories."""
    cdef _CtxView C = _CtxView(ctx)
    Xs_arr = np.ascontiguousarray(np.asarray(Xs, dtype=np.float64))
    Us_arr = np.ascontiguousarray(np.asarray(Us, dtype=np.float64))
    cdef Py_ssize_t K = Xs_arr.shape[0]
    cost = np.empty(K)
    eq = np.empty((K, ctx.n_eq))
    ineq = np.empty((K, ctx.n_ineq))
    lam = np.zeros((K, C.n_nodes, C.n_c, 3))
    _components_kernel(C, Xs_arr, Us_arr, cost, eq, ineq, lam)
    return cost, eq, ineq, lam


def phase_eval(Y, ctx):
    """Cost, equalities, inequalities, and node contact forces for a phase."""
    Y = np.asarray(Y, dtype=np.float64)
    n, nx, nu = ctx.n_nodes, ctx.nx, ctx.nu
    X = Y[: n * nx].reshape(1, n, nx)
    U = Y[n * nx :].reshape(1, n, nu)
    cost, eq, ineq, lam = _phase_components(X, U, ctx)
    return float(cost[0]), eq[0], ineq[0], lam[0]


cdef void _merit_reduce(
    double[::1] cost,
    double[:, ::1] eq,
    double[:, ::1] ineq,
    double[::1] mu_eq,
    double[::1] mu_in,
    double rho,
    double[::1] out,
) nogil:
    cdef Py_ssize_t K = cost.shape[0]
    cdef Py_ssize_t m_eq = eq.shape[1]
    cdef Py_ssize_t m_in = ineq.shape[1]
    cdef Py_ssize_t kk, j
    cdef double s1, s2, t, val, mu_sq
    mu_sq = 0.0
    for j in range(m_in):
        mu_sq += mu_in[j] * mu_in[j]
    for kk in range(K):
        val = cost[kk]
        s1 = 0.0
        s2 = 0.0
        for j in range(m_eq):
            s1 += eq[kk, j] * mu_eq[j]
            s2 += eq[kk, j] * eq[kk, j]
        val += -s1 + 0.5 * rho * s2
        s1 = 0.0
        for j in range(m_in):
            t = mu_in[j] - rho * ineq[kk, j]
            if t > 0.0:
                s1 += t * t
        val += (s1 - mu_sq) / (2.0 * rho)
        out[kk] = val


def _merits(cost, eq, ineq, mu_eq, mu_in, rho):
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    out = np.empty(cost.shape[0])
    _merit_reduce(
        cost,
        np.ascontiguousarray(eq, dtype=np.float64),
        np.ascontiguousarray(ineq, dtype=np.float64),
        np.ascontiguousarray(mu_eq, dtype=np.float64),
        np.ascontiguousarray(mu_in, dtype=np.float64),
        float(rho),
        out,
    )
    return out


def al_merit(Y, ctx, mu_eq, mu_in, rho):
    cost, eq, ineq, _ = phase_eval(Y, ctx)
    return float(
        _merits(np.array([cost]), eq[None, :], ineq[None, :], mu_eq, mu_in, rho)[0]
    )


def al_merit_and_grad(Y, ctx, mu_eq, mu_in, rho, fd_step=1e-6):
    """Merit value and central-difference gradient from one batched pass."""
    Y = np.asarray(Y, dtype=np.float64)
    m = Y.size
    steps = fd_step * np.maximum(1.0, np.abs(Y))
    Ys = np.tile(Y, (2 * m + 1, 1))
    rng = np.arange(m)
    Ys[rng, rng] += steps
    Ys[m + rng, rng] -= steps
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
    merits = _merits(cost, eq, ineq, mu_eq, mu_in, rho)
    grad = (merits[:m] - merits[m : 2 * m]) / (2.0 * steps)
    return float(merits[2 * m]), grad


def al_merit_grad(Y, ctx, mu_eq, mu_in, rho, fd_step=1e-6):
    return al_merit_and_grad(Y, ctx, mu_eq, mu_in, rho, fd_step)[1]


def _merit_grad_loop(Y, ctx, mu_eq, mu_in, rho, steps):
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
