"""Nonparametric bootstrap of the projected estimator and confidence bands.

Whole observation rows are resampled with replacement (preserving
cross-sectional dependence), each resample is re-estimated (pilot then
projection) and the resulting coefficient vectors form the ensemble.
Simultaneous bands take coefficientwise order statistics of the ensemble, so
the band limits are themselves Bernstein polynomials; pointwise bands take
order statistics of the evaluated replicates per grid point and carry no
shape guarantee.
"""

import math
from dataclasses import dataclass

import numpy as np

from .bernstein import basis_matrix, evaluate_on_points, validate_simplex_points
from .errors import NumericalError
from .estimators import as_sample_matrix, estimate_pickands_classical, estimate_pickands_md
from .projection import SimplexProjector, midpoint_convexity_gap

DEFAULT_REPLICATES = 500


@dataclass(frozen=True)
class CoefficientEnsemble:
    """Bootstrap replicate coefficients, one feasible vector per row."""

    replicates: np.ndarray
    r: int
    d: int
    k: int
    n: int
    seed: int
    pilot_kind: str
    grid_resolution: int | None
    skipped: int


@dataclass(frozen=True)
class ConfidenceBand:
    lower_beta: np.ndarray
    upper_beta: np.ndarray
    level: float
    kind: str
    d: int
    k: int

    def evaluate_lower(self, points):
        return evaluate_on_points(self.lower_beta, points, self.k)

    def evaluate_upper(self, points):
        return evaluate_on_points(self.upper_beta, points, self.k)


@dataclass(frozen=True)
class PointwiseBand:
    grid: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    level: float
    kind: str = "pointwise"


def _pilot_values(data, grid, kind):
    if kind == "MD":
        return estimate_pickands_md(data, grid).values
    return estimate_pickands_classical(data, grid, kind).values


def bootstrap_coefficients(
    data,
    pilot_kind="MD",
    k=8,
    r=DEFAULT_REPLICATES,
    seed=0,
    grid_resolution=None,
):
    """Resample rows with replacement and re-estimate; returns the coefficient ensemble.

    A replicate whose projection fails numerically is retried once on a grid
    with 1.5x the resolution, then skipped (the skip count is reported on the
    ensemble).  Reproducible: replicate streams are spawned from ``seed``.
    """
    data = as_sample_matrix(data)
    if r < 1:
        raise ValueError("need at least one bootstrap replicate")
    n, d = data.shape
    projector = SimplexProjector(d, k, resolution=grid_resolution)
    full_values = _pilot_values(data, projector.grid, pilot_kind)
    _, full_solution = projector.project_values(full_values, pilot_kind=pilot_kind)
    warm = full_solution.active

    fine = None
    rows = []
    skipped = 0
    streams = np.random.SeedSequence(seed).spawn(r)
    for stream in streams:
        rng = np.random.default_rng(stream)
        resample = data[rng.integers(0, n, size=n)]
        try:
            values = _pilot_values(resample, projector.grid, pilot_kind)
            estimate, _ = projector.project_values(values, pilot_kind=pilot_kind, warm_start=warm)
        except NumericalError:
            try:
                if fine is None:
                    fine = SimplexProjector(
                        d, k, resolution=max(projector.grid_resolution + 1, int(math.ceil(1.5 * projector.grid_resolution)))
                    )
                values = _pilot_values(resample, fine.grid, pilot_kind)
                estimate, _ = fine.project_values(values, pilot_kind=pilot_kind)
            except NumericalError:
                skipped += 1
                continue
        rows.append(estimate.beta_hat)
    if not rows:
        raise NumericalError(f"all {r} bootstrap replicates failed to project")
    return CoefficientEnsemble(
        replicates=np.array(rows),
        r=len(rows),
        d=d,
        k=k,
        n=n,
        seed=seed,
        pilot_kind=pilot_kind,
        grid_resolution=projector.grid_resolution,
        skipped=skipped,
    )


def order_statistic_indices(r, alpha_tilde):
    """1-based order-statistic ranks (ceil(r a/2), ceil(r (1 - a/2))) of the band limits."""
    low = math.ceil(r * alpha_tilde / 2.0)
    high = math.ceil(r * (1.0 - alpha_tilde / 2.0))
    return max(low, 1), min(high, r)


def _check_level(ensemble, alpha_tilde):
    if not 0.0 < alpha_tilde < 1.0:
        raise ValueError(f"level parameter must be in (0, 1), got {alpha_tilde!r}")
    r = ensemble.r
    if r > 1 and r < 2.0 / alpha_tilde:
        raise ValueError(
            f"{r} replicates are too few for a {1 - alpha_tilde:.3f} band; need r >= {2.0 / alpha_tilde:.0f}"
        )
    return r


def simultaneous_band(ensemble, alpha_tilde):
    """Coefficientwise order-statistic band; limits are valid Bernstein coefficient vectors."""
    r = _check_level(ensemble, alpha_tilde)
    low, high = order_statistic_indices(r, alpha_tilde)
    ordered = np.sort(ensemble.replicates, axis=0)
    return ConfidenceBand(
        lower_beta=ordered[low - 1],
        upper_beta=ordered[high - 1],
        level=1.0 - alpha_tilde,
        kind="simultaneous",
        d=ensemble.d,
        k=ensemble.k,
    )


def pointwise_band(ensemble, grid, alpha_tilde):
    """Per-point order-statistic intervals of the evaluated replicates (no shape guarantee)."""
    r = _check_level(ensemble, alpha_tilde)
    grid = validate_simplex_points(grid, ensemble.d)
    low, high = order_statistic_indices(r, alpha_tilde)
    evaluated = basis_matrix(grid, ensemble.k) @ ensemble.replicates.T
    ordered = np.sort(evaluated, axis=1)
    return PointwiseBand(
        grid=grid,
        lower=ordered[:, low - 1],
        upper=ordered[:, high - 1],
        level=1.0 - alpha_tilde,
    )


def band_convexity_diagnostic(band, n_pairs=2000, seed=0):
    """Worst midpoint-convexity violation of the two band limits (no repair is applied)."""
    return {
        "lower": midpoint_convexity_gap(
            lambda pts: evaluate_on_points(band.lower_beta, pts, band.k), band.d, n_pairs, seed
        ),
        "upper": midpoint_convexity_gap(
            lambda pts: evaluate_on_points(band.upper_beta, pts, band.k), band.d, n_pairs, seed
        ),
    }
