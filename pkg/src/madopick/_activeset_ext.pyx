# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twin of :mod:`madopick._activeset`.

Same dual active-set algorithm, same update order, typed loops instead of
numpy vector operations.  Kept in lockstep with the pure module; the facade
:mod:`madopick.qp` selects between the two at import time.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, fabs, hypot
from scipy.linalg.cython_blas cimport dgemv, drot

cnp.import_array()

OPTIMAL = 0
MAX_ITER = 1
INFEASIBLE = 2

cdef double VIOLATION_TOL = 1e-11


cdef inline void _apply_to_columns(double[:, ::1] mat, Py_ssize_t i, Py_ssize_t j,
                                   double c, double s) noexcept nogil:
    # rotate columns i and j: col_i' = c col_i + s col_j, col_j' = -s col_i + c col_j
    cdef int n = <int> mat.shape[0]
    cdef int stride = <int> mat.shape[1]
    drot(&n, &mat[0, i], &stride, &mat[0, j], &stride, &c, &s)


cdef bint _add_constraint(double[:, ::1] J, double[:, ::1] R, double[::1] d,
                          Py_ssize_t na) noexcept nogil:
    cdef Py_ssize_t p = J.shape[0]
    cdef Py_ssize_t i
    cdef double c, s, r, peak
    for i in range(p - 1, na, -1):
        r = hypot(d[i - 1], d[i])
        if r == 0.0:
            c = 1.0
            s = 0.0
        else:
            c = d[i - 1] / r
            s = d[i] / r
        d[i - 1] = r
        d[i] = 0.0
        if r != 0.0:
            _apply_to_columns(J, i - 1, i, c, s)
    peak = 0.0
    for i in range(na + 1):
        if fabs(d[i]) > peak:
            peak = fabs(d[i])
    if fabs(d[na]) < 1e-14 * (1.0 + peak):
        return False
    for i in range(na + 1):
        R[i, na] = d[i]
    return True


cdef Py_ssize_t _drop_constraint(double[:, ::1] J, double[:, ::1] R,
                                 long long[::1] active, double[::1] u,
                                 Py_ssize_t position, Py_ssize_t na) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef Py_ssize_t rows = na + 1 if na + 1 < R.shape[0] else R.shape[0]
    cdef double c, s, r, row_j
    for j in range(position, na - 1):
        for i in range(rows):
            R[i, j] = R[i, j + 1]
        active[j] = active[j + 1]
        u[j] = u[j + 1]
    na -= 1
    for j in range(position, na):
        if R[j + 1, j] != 0.0:
            r = hypot(R[j, j], R[j + 1, j])
            c = R[j, j] / r
            s = R[j + 1, j] / r
            for i in range(j, na):
                row_j = c * R[j, i] + s * R[j + 1, i]
                R[j + 1, i] = -s * R[j, i] + c * R[j + 1, i]
                R[j, i] = row_j
            R[j, j] = r
            R[j + 1, j] = 0.0
            _apply_to_columns(J, j, j + 1, c, s)
    return na


cdef void _solve_upper(double[:, ::1] R, Py_ssize_t na, double[::1] rhs,
                       double[::1] out) noexcept nogil:
    # backward substitution; safe when out aliases rhs
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(na - 1, -1, -1):
        acc = rhs[i]
        for j in range(i + 1, na):
            acc -= R[i, j] * out[j]
        out[i] = acc / R[i, i]


cdef void _solve_lower_t(double[:, ::1] R, Py_ssize_t na, double[::1] rhs,
                         double[::1] out) noexcept nogil:
    # solves R^T y = rhs; safe when out aliases rhs
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(na):
        acc = rhs[i]
        for j in range(i):
            acc -= R[j, i] * out[j]
        out[i] = acc / R[i, i]


cdef double ONE = 1.0
cdef double ZERO = 0.0
cdef int INC1 = 1


cdef void _mat_t_vec(double[:, ::1] mat, double[::1] vec, double[::1] out) noexcept nogil:
    # out = mat.T @ vec; a C-contiguous (rows, cols) buffer is the Fortran
    # (cols, rows) matrix mat.T, so this is a plain 'N' gemv
    cdef int rows = <int> mat.shape[0], cols = <int> mat.shape[1]
    dgemv(b"N", &cols, &rows, &ONE, &mat[0, 0], &cols, &vec[0], &INC1, &ZERO, &out[0], &INC1)


cdef void _mat_vec(double[:, ::1] mat, double[::1] vec, double[::1] out) noexcept nogil:
    # out = mat @ vec
    cdef int rows = <int> mat.shape[0], cols = <int> mat.shape[1]
    dgemv(b"T", &cols, &rows, &ONE, &mat[0, 0], &cols, &vec[0], &INC1, &ZERO, &out[0], &INC1)


cdef void _tail_combination(double[:, ::1] J, double[::1] d, Py_ssize_t na,
                            double[::1] out) noexcept nogil:
    # out = J[:, na:] @ d[na:]; the tail columns of J are the tail rows of the
    # Fortran view, reachable by offsetting the base pointer by na
    cdef int p = <int> J.shape[0]
    cdef int tail = p - <int> na
    cdef Py_ssize_t i
    if tail <= 0:
        for i in range(p):
            out[i] = 0.0
        return
    dgemv(b"T", &tail, &p, &ONE, &J[0, na], &p, &d[na], &INC1, &ZERO, &out[0], &INC1)


cdef void _equality_solution(double[:, ::1] J, double[:, ::1] R,
                             long long[::1] active, Py_ssize_t na,
                             double[::1] a, double[::1] b,
                             double[::1] x, double[::1] u_eq,
                             double[::1] h, double[::1] t1) noexcept nogil:
    # optimum of the equality-constrained problem for the current active set:
    # t = (R^-T b_A, h_free), u = R^-1 (t1 - h_A), x = J t
    cdef Py_ssize_t i
    _mat_t_vec(J, a, h)
    if na > 0:
        for i in range(na):
            t1[i] = b[active[i]]
        _solve_lower_t(R, na, t1, t1)
        for i in range(na):
            u_eq[i] = t1[i] - h[i]
        _solve_upper(R, na, u_eq, u_eq)
        for i in range(na):
            h[i] = t1[i]
    _mat_vec(J, h, x)


def gi_solve(double[:, ::1] J0, double[::1] a, double[:, ::1] C, double[::1] b,
             long long max_iter, warm_active=None):
    """Mirror of the pure backend; see that module for the algorithm notes."""
    from madopick._activeset import REFACTOR_INTERVAL, refactorize

    cdef Py_ssize_t p = a.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    J0_arr = np.asarray(J0)
    C_arr = np.asarray(C)
    J_arr = np.array(J0, dtype=np.float64)
    R_arr = np.zeros((p, p))
    active_arr = np.full(p, -1, dtype=np.int64)
    u_arr = np.zeros(p)
    x_arr = np.zeros(p)
    slack_arr = np.zeros(m)
    d_arr = np.zeros(p)
    z_arr = np.zeros(p)
    r_arr = np.zeros(p)
    h_arr = np.zeros(p)
    t_arr = np.zeros(p)
    ueq_arr = np.zeros(p)
    is_active_arr = np.zeros(m, dtype=np.uint8)

    cdef double[:, ::1] J = J_arr
    cdef double[:, ::1] R = R_arr
    cdef long long[::1] active = active_arr
    cdef double[::1] u = u_arr
    cdef double[::1] x = x_arr
    cdef double[::1] slack = slack_arr
    cdef double[::1] d = d_arr
    cdef double[::1] z = z_arr
    cdef double[::1] r_vec = r_arr
    cdef double[::1] h = h_arr
    cdef double[::1] t_scr = t_arr
    cdef double[::1] u_eq = ueq_arr
    cdef cnp.uint8_t[::1] is_active = is_active_arr

    cdef Py_ssize_t na = 0
    cdef long long iters = 0
    cdef Py_ssize_t i, j, chosen, blocking, worst, idx, n_warm
    cdef double s_v, vtol, t1, full_step, step, zn, dd, candidate, acc, bmax, u_plus

    if warm_active is not None:
        warm_arr = np.ascontiguousarray(np.asarray(warm_active, dtype=np.int64))
        n_warm = warm_arr.shape[0]
        for j in range(n_warm):
            idx = <Py_ssize_t> warm_arr[j]
            if idx < 0 or idx >= m or is_active[idx] or na >= p:
                continue
            _mat_t_vec(J, C[idx], d)
            if _add_constraint(J, R, d, na):
                active[na] = idx
                is_active[idx] = 1
                na += 1
        while na > 0:
            _equality_solution(J, R, active, na, a, b, x, u_eq, h, t_scr)
            worst = 0
            for i in range(1, na):
                if u_eq[i] < u_eq[worst]:
                    worst = i
            if u_eq[worst] >= -1e-12:
                for i in range(na):
                    u[i] = u_eq[i] if u_eq[i] > 0.0 else 0.0
                break
            is_active[active[worst]] = 0
            na = _drop_constraint(J, R, active, u, worst, na)
        if na == 0:
            _mat_t_vec(J, a, h)
            _mat_vec(J, h, x)
    else:
        _mat_t_vec(J, a, h)
        _mat_vec(J, h, x)

    bmax = 0.0
    for i in range(m):
        if fabs(b[i]) > bmax:
            bmax = fabs(b[i])
    vtol = VIOLATION_TOL * (1.0 + bmax)
    cdef long long next_refactor = REFACTOR_INTERVAL

    while True:
        if iters >= next_refactor and na > 0:
            next_refactor = iters + REFACTOR_INTERVAL
            rebuilt = refactorize(J0_arr, C_arr, active_arr[:na])
            if rebuilt is not None:
                J_arr[:, :] = rebuilt[0]
                R_arr[:, :] = rebuilt[1]
                while na > 0:
                    _equality_solution(J, R, active, na, a, b, x, u_eq, h, t_scr)
                    worst = 0
                    for i in range(1, na):
                        if u_eq[i] < u_eq[worst]:
                            worst = i
                    if u_eq[worst] >= -1e-12:
                        for i in range(na):
                            u[i] = u_eq[i] if u_eq[i] > 0.0 else 0.0
                        break
                    is_active[active[worst]] = 0
                    na = _drop_constraint(J, R, active, u, worst, na)
                if na == 0:
                    _mat_t_vec(J, a, h)
                    _mat_vec(J, h, x)

        _mat_vec(C, x, slack)
        for i in range(m):
            slack[i] -= b[i]
        for i in range(na):
            if slack[active[i]] < 0.0:
                slack[active[i]] = 0.0
        chosen = 0
        for i in range(1, m):
            if slack[i] < slack[chosen]:
                chosen = i
        s_v = slack[chosen]
        if s_v >= -vtol:
            return x_arr.copy(), u_arr[:na].copy(), active_arr[:na].copy(), int(iters), OPTIMAL
        u_plus = 0.0

        while True:
            iters += 1
            if iters > max_iter:
                return x_arr.copy(), u_arr[:na].copy(), active_arr[:na].copy(), int(iters), MAX_ITER
            _mat_t_vec(J, C[chosen], d)
            _tail_combination(J, d, na, z)
            dd = 0.0
            for i in range(p):
                dd += d[i] * d[i]
            zn = 0.0
            for i in range(na, p):
                zn += d[i] * d[i]
            if na > 0:
                _solve_upper(R, na, d, r_vec)

            t1 = INFINITY
            blocking = -1
            for i in range(na):
                if r_vec[i] > 0.0:
                    candidate = u[i] / r_vec[i]
                    if candidate < t1:
                        t1 = candidate
                        blocking = i

            full_step = INFINITY
            if zn > 1e-14 * (dd if dd > 1e-30 else 1e-30):
                full_step = -s_v / zn
            step = t1 if t1 < full_step else full_step
            if step == INFINITY:
                return x_arr.copy(), u_arr[:na].copy(), active_arr[:na].copy(), int(iters), INFEASIBLE

            if full_step == INFINITY:
                for i in range(na):
                    u[i] -= t1 * r_vec[i]
                u_plus += t1
                is_active[active[blocking]] = 0
                na = _drop_constraint(J, R, active, u, blocking, na)
                continue

            for i in range(p):
                x[i] += step * z[i]
            for i in range(na):
                u[i] -= step * r_vec[i]
            u_plus += step
            s_v += step * zn
            if full_step <= t1:
                if not _add_constraint(J, R, d, na):
                    return x_arr.copy(), u_arr[:na].copy(), active_arr[:na].copy(), int(iters), INFEASIBLE
                active[na] = chosen
                is_active[chosen] = 1
                u[na] = u_plus
                na += 1
                break
            is_active[active[blocking]] = 0
            na = _drop_constraint(J, R, active, u, blocking, na)
