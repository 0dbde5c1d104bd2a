"""Dual active-set solver for strictly convex quadratic programs (pure-numpy backend).

Solves  min_x 1/2 x^T G x - a^T x  subject to  C x >= b  (rows of C are
constraint normals), in the Goldfarb-Idnani fashion: start at the
unconstrained minimum (dual feasible), repeatedly pick a violated constraint
and take mixed primal/dual steps, adding it to the active set or dropping a
blocking one, until primal feasible.  The factorizations are maintained
incrementally: J with J^T G J = I (initialized to L^{-T} from G = L L^T) and
the triangular R with J^T N_active = [R; 0], both updated by Givens rotations
on constraint adds/drops.

The compiled twin :mod:`madopick._activeset_ext` implements the identical
algorithm with the identical update order; :mod:`madopick.qp` picks between
them at import time.

Status codes: 0 optimal, 1 iteration cap exceeded, 2 no feasible step
(inconsistent constraints or numerical breakdown).
"""

import math

import numpy as np

OPTIMAL = 0
MAX_ITER = 1
INFEASIBLE = 2

_VIOLATION_TOL = 1e-11

#: rebuild the factorizations from scratch this often; hundreds of
#: incremental Givens updates otherwise degrade them enough to corrupt
#: the active-set decisions on near-degenerate problems
REFACTOR_INTERVAL = 125


def refactorize(J0, C, active_idx):
    """Fresh (J, R) for a given active set via one QR; None if rows are dependent."""
    active_idx = np.asarray(active_idx, dtype=np.int64)
    na = len(active_idx)
    p = J0.shape[0]
    q_full, r_full = np.linalg.qr(J0.T @ C[active_idx].T, mode="complete")
    r_tri = r_full[:na, :na]
    diag = np.abs(np.diag(r_tri))
    if na and diag.min() < 1e-13 * max(1.0, diag.max()):
        return None
    J = J0 @ q_full
    R = np.zeros((p, p))
    R[:na, :na] = r_tri
    return J, R


def _rotation(a, b):
    r = math.hypot(a, b)
    if r == 0.0:
        return 1.0, 0.0, 0.0
    return a / r, b / r, r


def _apply_to_columns(mat, i, j, c, s):
    col_i = c * mat[:, i] + s * mat[:, j]
    mat[:, j] = -s * mat[:, i] + c * mat[:, j]
    mat[:, i] = col_i


def _add_constraint(J, R, d, na):
    """Rotate the tail of d = J^T n into position na; returns False if dependent."""
    p = J.shape[0]
    for i in range(p - 1, na, -1):
        c, s, r = _rotation(d[i - 1], d[i])
        d[i - 1] = r
        d[i] = 0.0
        if r != 0.0:
            _apply_to_columns(J, i - 1, i, c, s)
    if abs(d[na]) < 1e-14 * (1.0 + np.max(np.abs(d[: na + 1]))):
        return False
    R[: na + 1, na] = d[: na + 1]
    return True


def _drop_constraint(J, R, active, u, position, na):
    """Remove active constraint at the given position, re-triangularizing R."""
    rows = min(na + 1, R.shape[0])
    for j in range(position, na - 1):
        R[:rows, j] = R[:rows, j + 1]
        active[j] = active[j + 1]
        u[j] = u[j + 1]
    na -= 1
    for j in range(position, na):
        c, s, r = _rotation(R[j, j], R[j + 1, j])
        if R[j + 1, j] != 0.0:
            row_j = c * R[j, j : na] + s * R[j + 1, j : na]
            R[j + 1, j : na] = -s * R[j, j : na] + c * R[j + 1, j : na]
            R[j, j : na] = row_j
            R[j, j] = r
            R[j + 1, j] = 0.0
            _apply_to_columns(J, j, j + 1, c, s)
    return na


def _solve_upper(R, na, rhs):
    out = np.zeros(na)
    for i in range(na - 1, -1, -1):
        out[i] = (rhs[i] - R[i, i + 1 : na] @ out[i + 1 : na]) / R[i, i]
    return out


def _solve_lower_t(R, na, rhs):
    # solves R^T y = rhs (R upper triangular)
    out = np.zeros(na)
    for i in range(na):
        out[i] = (rhs[i] - R[: i, i] @ out[: i]) / R[i, i]
    return out


def _solution_from_factors(J, R, active, na, a, b):
    """Equality-constrained optimum for the current active set."""
    h = J.T @ a
    if na == 0:
        return J @ h, np.zeros(0)
    t1 = _solve_lower_t(R, na, b[active[:na]])
    u = _solve_upper(R, na, t1 - h[:na])
    x = J @ np.concatenate([t1, h[na:]])
    return x, u


def gi_solve(J0, a, C, b, max_iter, warm_active=None):
    """Run the dual active-set iteration.

    J0: (p, p) with J0 J0^T = G^{-1}; a: linear term; C: (m, p) constraint
    rows; b: (m,) right-hand sides.  Returns (x, u_active, active, iters,
    status).
    """
    p = a.size
    m = b.size
    J = np.array(J0, dtype=np.float64)
    R = np.zeros((p, p))
    active = np.full(p, -1, dtype=np.int64)
    u = np.zeros(p)
    na = 0
    iters = 0
    is_active = np.zeros(m, dtype=bool)

    if warm_active is not None:
        for idx in warm_active:
            idx = int(idx)
            if idx < 0 or idx >= m or is_active[idx] or na >= p:
                continue
            d = J.T @ C[idx]
            if _add_constraint(J, R, d, na):
                active[na] = idx
                is_active[idx] = True
                na += 1
        while na > 0:
            x, u_eq = _solution_from_factors(J, R, active, na, a, b)
            worst = int(np.argmin(u_eq))
            if u_eq[worst] >= -1e-12:
                u[:na] = np.maximum(u_eq, 0.0)
                break
            is_active[active[worst]] = False
            na = _drop_constraint(J, R, active, u, worst, na)
        if na == 0:
            x = J @ (J.T @ a)
            u[:] = 0.0
    else:
        x = J @ (J.T @ a)

    vtol = _VIOLATION_TOL * (1.0 + float(np.max(np.abs(b))))
    next_refactor = REFACTOR_INTERVAL

    while True:
        if iters >= next_refactor and na > 0:
            next_refactor = iters + REFACTOR_INTERVAL
            rebuilt = refactorize(J0, C, active[:na])
            if rebuilt is not None:
                J, R_new = rebuilt
                R[:, :] = R_new
                while na > 0:
                    x, u_eq = _solution_from_factors(J, R, active, na, a, b)
                    worst = int(np.argmin(u_eq))
                    if u_eq[worst] >= -1e-12:
                        u[:na] = np.maximum(u_eq, 0.0)
                        break
                    is_active[active[worst]] = False
                    na = _drop_constraint(J, R, active, u, worst, na)
                if na == 0:
                    x = J @ (J.T @ a)

        slack = C @ x - b
        if na > 0:
            slack[active[:na]] = np.maximum(slack[active[:na]], 0.0)
        chosen = int(np.argmin(slack))
        s_v = float(slack[chosen])
        if s_v >= -vtol:
            return x, u[:na].copy(), active[:na].copy(), iters, OPTIMAL
        normal = C[chosen]
        u_plus = 0.0

        while True:
            iters += 1
            if iters > max_iter:
                return x, u[:na].copy(), active[:na].copy(), iters, MAX_ITER
            d = J.T @ normal
            z = J[:, na:] @ d[na:]
            zn = float(d[na:] @ d[na:])
            r_vec = _solve_upper(R, na, d[:na]) if na > 0 else np.zeros(0)

            t1 = math.inf
            blocking = -1
            for i in range(na):
                if r_vec[i] > 0.0:
                    candidate = u[i] / r_vec[i]
                    if candidate < t1:
                        t1 = candidate
                        blocking = i

            full_step = math.inf
            if zn > 1e-14 * max(float(d @ d), 1e-30):
                full_step = -s_v / zn
            step = min(t1, full_step)
            if not math.isfinite(step):
                return x, u[:na].copy(), active[:na].copy(), iters, INFEASIBLE

            if math.isinf(full_step):
                # dual-only step: walk multipliers until one blocks, drop it
                u[:na] -= t1 * r_vec
                u_plus += t1
                is_active[active[blocking]] = False
                na = _drop_constraint(J, R, active, u, blocking, na)
                continue

            x = x + step * z
            u[:na] -= step * r_vec
            u_plus += step
            s_v += step * zn
            if full_step <= t1:
                if not _add_constraint(J, R, d, na):
                    return x, u[:na].copy(), active[:na].copy(), iters, INFEASIBLE
                active[na] = chosen
                is_active[chosen] = True
                u[na] = u_plus
                na += 1
                break
            is_active[active[blocking]] = False
            na = _drop_constraint(J, R, active, u, blocking, na)


def polish(J0, a, C, b, active, gram=None, refinements=2):
    """Recompute (x, u) for a fixed active set from a fresh QR factorization.

    With ``gram`` supplied, a few iterative-refinement steps against the exact
    KKT system remove the drift accumulated by the incremental updates.  The
    multipliers may come out slightly negative when the active normals are
    nearly dependent (degenerate optimum); the caller decides how to repair
    them (the dual decomposition is non-unique there).  Returns None when the
    active normals are numerically dependent.
    """
    from scipy.linalg import solve_triangular

    act = np.asarray(active, dtype=np.int64)
    na = len(act)
    if na == 0:
        return J0 @ (J0.T @ a), np.zeros(0), act.copy()
    normals = C[act]
    q_full, r_full = np.linalg.qr(J0.T @ normals.T, mode="complete")
    r_tri = r_full[:na, :na]
    diag = np.abs(np.diag(r_tri))
    if diag.min() < 1e-13 * max(1.0, diag.max()):
        return None

    def eq_solve(a_vec, b_vals):
        h = q_full.T @ (J0.T @ a_vec)
        t1 = solve_triangular(r_tri, b_vals, trans="T", lower=False)
        u = solve_triangular(r_tri, t1 - h[:na], lower=False)
        x = J0 @ (q_full @ np.concatenate([t1, h[na:]]))
        return x, u

    x, u = eq_solve(a, b[act])
    if gram is not None:
        b_act = b[act]
        for _ in range(refinements):
            r1 = a - (gram @ x - normals.T @ u)
            r2 = b_act - normals @ x
            dx, du = eq_solve(r1, r2)
            x = x + dx
            u = u + du
    return x, u, act.copy()
