"""Bernstein-Bezier polynomials on the unit simplex.

A point of the (d-1)-dimensional unit simplex is carried as all d barycentric
coordinates (nonnegative, summing to one).  Multi-indices are d-tuples of
nonnegative integers summing to the degree k; there are
``p = C(k+d-1, d-1)`` of them and they are listed in lexicographic order.
That ordering is a frozen contract shared with :mod:`madopick.constraints`:
coefficient vectors, basis vectors and constraint-matrix columns all use it.
"""

import math
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

#: tolerance on "coordinates sum to one" for simplex points
COORD_TOL = 1e-12


def multi_index_count(d, k):
    """Number of d-part multi-indices of total degree k, C(k+d-1, d-1)."""
    return math.comb(k + d - 1, d - 1)


def _check_dimension_degree(d, k, min_k=1):
    if int(d) != d or d < 2:
        raise ValueError(f"dimension d must be an integer >= 2, got {d!r}")
    if int(k) != k or k < min_k:
        raise ValueError(f"degree k must be an integer >= {min_k}, got {k!r}")
    return int(d), int(k)


@lru_cache(maxsize=None)
def _multi_indices(d, k):
    rows = []

    def fill(prefix, remaining, slots):
        if slots == 1:
            rows.append(prefix + (remaining,))
            return
        for a in range(remaining + 1):
            fill(prefix + (a,), remaining - a, slots - 1)

    fill((), k, d)
    out = np.array(rows, dtype=np.int64)
    out.setflags(write=False)
    return out


def enumerate_multi_indices(d, k):
    """All d-part multi-indices summing to k, lexicographically ordered.

    Returns a read-only (p, d) integer array whose rows are the multi-indices;
    row order is the canonical coefficient ordering.
    """
    d, k = _check_dimension_degree(d, k)
    return _multi_indices(d, k)


@lru_cache(maxsize=None)
def _index_positions(d, k):
    table = enumerate_multi_indices(d, k)
    return {tuple(row): i for i, row in enumerate(table.tolist())}


def multi_index_position(alpha, d, k):
    """Position of multi-index ``alpha`` in the canonical ordering."""
    return _index_positions(d, k)[tuple(int(a) for a in alpha)]


def as_simplex_point(w, d=None):
    """Validate barycentric coordinates and return them as a float array."""
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1 or w.size < 2:
        raise ValueError("a simplex point needs at least 2 barycentric coordinates")
    if d is not None and w.size != d:
        raise ValueError(f"expected {d} coordinates, got {w.size}")
    if np.any(w < -COORD_TOL) or np.any(w > 1.0 + COORD_TOL):
        raise ValueError(f"coordinates outside [0, 1]: {w}")
    if abs(w.sum() - 1.0) > COORD_TOL:
        raise ValueError(f"coordinates must sum to 1 (got {w.sum()!r})")
    return np.where(w <= 0.0, 0.0, w)


def validate_simplex_points(points, d=None):
    """Validate a (Q, d) batch of simplex points."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] < 2:
        raise ValueError("expected a (Q, d) array of barycentric coordinates")
    if d is not None and pts.shape[1] != d:
        raise ValueError(f"expected {d} coordinates per point, got {pts.shape[1]}")
    if np.any(pts < -COORD_TOL) or np.any(pts > 1.0 + COORD_TOL):
        raise ValueError("coordinates outside [0, 1]")
    if np.max(np.abs(pts.sum(axis=1) - 1.0)) > COORD_TOL:
        raise ValueError("coordinates must sum to 1 on every row")
    return np.where(pts <= 0.0, 0.0, pts)


def simplex_grid(d, resolution):
    """Lattice {alpha/m : alpha in the degree-m multi-index set} as a (Q, d) array.

    Contains all d vertices; the row order is the canonical multi-index order.
    """
    d, m = _check_dimension_degree(d, resolution)
    return enumerate_multi_indices(d, m) / float(m)


def barycenter(d):
    return np.full(d, 1.0 / d)


@lru_cache(maxsize=None)
def _log_multinomial(d, k):
    alphas = enumerate_multi_indices(d, k)
    out = gammaln(k + 1) - gammaln(alphas + 1.0).sum(axis=1)
    out.setflags(write=False)
    return out


def basis_matrix(points, k):
    """Bernstein basis values at each point: (Q, p) matrix, columns in canonical order.

    Uses the 0^0 = 1 convention so boundary points (zero coordinates) are exact:
    a basis function vanishes identically whenever its multi-index loads a zero
    coordinate, and equals one at its own vertex.
    """
    pts = validate_simplex_points(points)
    d = pts.shape[1]
    _, k = _check_dimension_degree(d, k)
    alphas = enumerate_multi_indices(d, k)
    logc = _log_multinomial(d, k)
    zero = pts <= 0.0
    logw = np.log(np.where(zero, 1.0, pts))
    values = np.exp(logc[None, :] + logw @ alphas.T.astype(np.float64))
    dead = zero.astype(np.float64) @ (alphas.T > 0) > 0.5
    values[dead] = 0.0
    return values


def bernstein_basis(w, k):
    """Basis vector b_alpha(w; k) over all multi-indices, canonical order."""
    return basis_matrix(as_simplex_point(w)[None, :], k)[0]


def evaluate_polynomial(beta, w, k):
    """Value at w of the polynomial with Bernstein coefficients beta."""
    w = as_simplex_point(w)
    beta = _check_coefficients(beta, w.size, k)
    return float(bernstein_basis(w, k) @ beta)


def evaluate_on_points(beta, points, k):
    """Vectorized :func:`evaluate_polynomial` over a (Q, d) batch of points."""
    pts = validate_simplex_points(points)
    beta = _check_coefficients(beta, pts.shape[1], k)
    return basis_matrix(pts, k) @ beta


def _check_coefficients(beta, d, k):
    beta = np.asarray(beta, dtype=np.float64)
    p = multi_index_count(d, k)
    if beta.shape != (p,):
        raise ValueError(
            f"coefficient vector has length {beta.shape}, expected ({p},) for d={d}, k={k}"
        )
    return beta


def bernstein_operator(f, k, d):
    """Coefficients of the degree-k Bernstein approximant of f: beta_alpha = f(alpha/k)."""
    d, k = _check_dimension_degree(d, k)
    lattice = simplex_grid(d, k)
    out = np.array([float(f(w)) for w in lattice])
    if not np.all(np.isfinite(out)):
        raise ValueError("function returned non-finite values on the coefficient lattice")
    return out


@lru_cache(maxsize=None)
def degree_raising_matrix(d, k):
    """Matrix mapping degree-k coefficients to equivalent degree-(k+1) coefficients.

    Row for multi-index alpha (degree k+1) holds weight alpha_h/(k+1) on the
    degree-k index alpha - e_h, for every h with alpha_h > 0; the represented
    polynomial is unchanged.
    """
    d, k = _check_dimension_degree(d, k)
    high = enumerate_multi_indices(d, k + 1)
    low_pos = _index_positions(d, k)
    mat = np.zeros((len(high), multi_index_count(d, k)))
    for row, alpha in enumerate(high.tolist()):
        for h, a_h in enumerate(alpha):
            if a_h == 0:
                continue
            lower = list(alpha)
            lower[h] -= 1
            mat[row, low_pos[tuple(lower)]] = a_h / (k + 1.0)
    mat.setflags(write=False)
    return mat


def raise_degree(beta, d, k):
    """Re-express a degree-k coefficient vector at degree k+1 (same polynomial)."""
    beta = _check_coefficients(beta, d, k)
    return degree_raising_matrix(d, k) @ beta
