"""Madogram and classical rank-based estimators of the Pickands dependence function.

The multivariate w-madogram is the mean gap between the componentwise maximum
and the componentwise average of the power-transformed margins F_i^{1/w_i}(X_i),
with the convention u^{1/0} = 0 applied as an explicit branch.  It is in
bijection with the Pickands dependence function A through

    nu(w) = A(w) / (1 + A(w)) - c(w),      c(w) = (1/d) sum_i w_i / (1 + w_i),

which the estimators invert pointwise.  The classical Pickands (P),
Caperaa-Fougeres-Genest (CFG) and Hall-Tajvidi (HT) estimators are provided
for comparison; they work on the exponential scores -log F(X) of the
rank-transformed margins.
"""

from dataclasses import dataclass

import numpy as np

from .bernstein import validate_simplex_points
from .errors import NumericalError

ESTIMATOR_KINDS = ("MD", "P", "CFG", "HT")

_EULER_GAMMA = float(np.euler_gamma)


@dataclass(frozen=True)
class PilotEstimate:
    """Unconstrained estimate of A on a finite grid (may violate shape conditions)."""

    grid: np.ndarray
    values: np.ndarray
    estimator_kind: str


@dataclass(frozen=True)
class MadogramValue:
    w: np.ndarray
    nu: float


def as_sample_matrix(data):
    """Validate an (n, d) observation matrix: rectangular, finite, n >= 2, d >= 2."""
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise ValueError("sample must be a 2-dimensional (n, d) array")
    n, d = data.shape
    if n < 2 or d < 2:
        raise ValueError(f"sample needs n >= 2 rows and d >= 2 columns, got {data.shape}")
    if not np.all(np.isfinite(data)):
        raise ValueError("sample contains non-finite values")
    return data


def ecdf(column, x):
    """Right-continuous empirical distribution function n^-1 sum 1(X_m <= x)."""
    column = np.asarray(column, dtype=np.float64)
    return float(np.count_nonzero(column <= x)) / column.size


def ecdf_transform(data):
    """Columnwise ECDF evaluated at the data itself: entries rank/n with max-ranks for ties."""
    data = as_sample_matrix(data)
    n = data.shape[0]
    out = np.empty_like(data)
    for i in range(data.shape[1]):
        col = data[:, i]
        order = np.sort(col)
        out[:, i] = np.searchsorted(order, col, side="right") / n
    return out


def madogram_offset(w):
    """The margin term c(w) = (1/d) sum_i w_i / (1 + w_i)."""
    w = np.asarray(w, dtype=np.float64)
    return float(np.mean(w / (1.0 + w)))


def _power_transform_gap(margins, weights):
    """Mean over rows of max_i m_i^{1/w_i} - mean_i m_i^{1/w_i}, batched over weights.

    margins: (n, d) values in [0, 1]; weights: (Q, d) simplex points.
    Zero weights zero out their column (explicit convention branch).
    """
    n, d = margins.shape
    out = np.empty(len(weights))
    # cap the (chunk, n, d) temporary at ~32 MB
    chunk = max(1, int(4.0e6 / margins.size))
    for start in range(0, len(weights), chunk):
        wc = weights[start : start + chunk]
        pos = wc > 0.0
        exponents = np.where(pos, 1.0 / np.where(pos, wc, 1.0), 0.0)
        t = margins[None, :, :] ** exponents[:, None, :]
        t = np.where(pos[:, None, :], t, 0.0)
        out[start : start + chunk] = (t.max(axis=2) - t.mean(axis=2)).mean(axis=1)
    return out


def _margin_values(data, margins):
    if margins == "empirical":
        return ecdf_transform(data)
    u = np.column_stack([np.asarray(f(data[:, i]), dtype=np.float64) for i, f in enumerate(margins)])
    if u.shape != data.shape:
        raise ValueError("marginal CDFs must return one value per observation")
    if np.any(u < 0.0) or np.any(u > 1.0):
        raise ValueError("marginal CDF values must lie in [0, 1]")
    return u


def empirical_madogram(data, w, margins="empirical"):
    """Sample w-madogram of the data at a single simplex point.

    ``margins`` is either ``"empirical"`` or a sequence of d marginal CDF
    callables (known-margins variant).
    """
    data = as_sample_matrix(data)
    w = validate_simplex_points(w, data.shape[1])[0]
    u = _margin_values(data, margins)
    nu = float(_power_transform_gap(u, w[None, :])[0])
    return MadogramValue(w=w, nu=nu)


def theoretical_madogram(pickands_fn, w):
    """Exact madogram A(w)/(1+A(w)) - c(w) of a known dependence function."""
    w = np.asarray(w, dtype=np.float64)
    a = float(pickands_fn(w))
    return a / (1.0 + a) - madogram_offset(w)


def madogram_to_pickands(value):
    """Invert a madogram value: A = (nu + c) / (1 - nu - c)."""
    nu = value.nu
    c = madogram_offset(value.w)
    denom = 1.0 - nu - c
    if denom <= 0.0:
        raise NumericalError(
            f"madogram inversion undefined: nu={nu!r}, c={c!r} give denominator {denom!r}"
        )
    return (nu + c) / denom


def _invert_on_grid(grid, nus, kind):
    offsets = np.mean(grid / (1.0 + grid), axis=1)
    denom = 1.0 - nus - offsets
    if np.any(denom <= 0.0):
        bad = int(np.argmin(denom))
        raise NumericalError(
            "madogram inversion failed at grid point "
            f"{grid[bad]} (nu={nus[bad]!r}, c={offsets[bad]!r})"
        )
    return PilotEstimate(grid=grid, values=(nus + offsets) / denom, estimator_kind=kind)


def estimate_pickands_md(data, grid, margins="empirical"):
    """Madogram estimate of the Pickands dependence function on a grid of simplex points."""
    data = as_sample_matrix(data)
    grid = validate_simplex_points(grid, data.shape[1])
    if len(grid) == 0:
        raise ValueError("grid must contain at least one point")
    u = _margin_values(data, margins)
    nus = _power_transform_gap(u, grid)
    return _invert_on_grid(grid, nus, "MD")


def _exponential_scores(data):
    """Scores -log(rank/(n+1)) per column; rejects degenerate (all-tied) columns."""
    data = as_sample_matrix(data)
    n = data.shape[0]
    for i in range(data.shape[1]):
        if np.all(data[:, i] == data[0, i]):
            raise ValueError(f"column {i} is degenerate (all values tied)")
    ranks = ecdf_transform(data) * n
    return -np.log(ranks / (n + 1.0))


def _min_scores(scores, weights):
    """min_i scores_i / w_i per row, batched over weights; zero weights drop out (ratio +inf)."""
    out = np.empty((len(weights), scores.shape[0]))
    chunk = max(1, int(4.0e6 / scores.size))
    with np.errstate(divide="ignore"):
        for start in range(0, len(weights), chunk):
            wc = weights[start : start + chunk]
            ratios = scores[None, :, :] / wc[:, None, :]
            out[start : start + chunk] = ratios.min(axis=2)
    return out


def estimate_pickands_classical(data, grid, kind):
    """Pickands (P), Caperaa-Fougeres-Genest (CFG) or Hall-Tajvidi (HT) estimate on a grid.

    All three work on exponential scores of the rank-transformed margins, with
    ranks rescaled by n/(n+1) inside the log transform so the scores stay
    strictly positive.  HT additionally normalizes each score column by its
    sample mean, which pins the estimate to 1 at every vertex.
    """
    if kind not in ("P", "CFG", "HT"):
        raise ValueError(f"unknown classical estimator kind {kind!r}")
    data = as_sample_matrix(data)
    grid = validate_simplex_points(grid, data.shape[1])
    scores = _exponential_scores(data)
    if kind == "HT":
        scores = scores / scores.mean(axis=0, keepdims=True)
    mins = _min_scores(scores, grid)
    if kind == "CFG":
        values = np.exp(-np.mean(np.log(mins), axis=1) - _EULER_GAMMA)
    else:
        values = 1.0 / mins.mean(axis=1)
    return PilotEstimate(grid=grid, values=values, estimator_kind=kind)
