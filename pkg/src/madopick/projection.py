"""Projection of pilot estimates onto the shape-constrained polynomial family.

``project`` takes an unconstrained pilot estimate on a grid and returns the
coefficient vector of the closest (discretized L2) Bernstein-Bezier polynomial
satisfying the convexity / vertex / bound constraints.  ``SimplexProjector``
caches the grid, design matrix, constraint system and matrix factorizations so
that repeated projections (bootstrap replicates, Monte-Carlo repetitions) only
pay for the active-set iterations.
"""

from dataclasses import dataclass

import numpy as np

from .bernstein import (
    barycenter,
    basis_matrix,
    evaluate_on_points,
    evaluate_polynomial,
    multi_index_count,
    simplex_grid,
    validate_simplex_points,
)
from .constraints import build_constraints, check_feasible
from .errors import NumericalError
from .estimators import PilotEstimate
from .qp import QpProblem, solve_qls

#: default evaluation-grid resolutions (Q stays moderate in high dimension)
def default_resolution(d):
    return 50 if d <= 3 else 12

#: required ratio of grid points to coefficients
MIN_POINT_RATIO = 2.0


@dataclass(frozen=True)
class ProjectedEstimate:
    """Shape-constrained estimate: coefficients in [0,1]^p with R beta >= r."""

    beta_hat: np.ndarray
    d: int
    k: int
    grid_resolution: int | None
    pilot_kind: str

    def evaluate(self, w):
        return evaluate_polynomial(self.beta_hat, np.asarray(w, dtype=np.float64), self.k)

    def evaluate_on(self, points):
        return evaluate_on_points(self.beta_hat, points, self.k)

    def feasibility(self, tol=1e-8):
        return check_feasible(self.beta_hat, build_constraints(self.d, self.k), tol=tol)

    def to_json_dict(self, provenance=None):
        return {
            "schema": 1,
            "kind": "pickands-estimate",
            "d": int(self.d),
            "k": int(self.k),
            "ordering": "graded-lex",
            "beta": [float(v) for v in self.beta_hat],
            "pilot_kind": self.pilot_kind,
            "grid_resolution": self.grid_resolution,
            "provenance": provenance or {},
        }

    @staticmethod
    def from_json_dict(doc):
        if doc.get("schema") != 1:
            raise ValueError(f"unsupported estimate schema {doc.get('schema')!r}")
        if doc.get("ordering") != "graded-lex":
            raise ValueError(f"unknown coefficient ordering {doc.get('ordering')!r}")
        beta = np.asarray(doc["beta"], dtype=np.float64)
        d, k = int(doc["d"]), int(doc["k"])
        if beta.shape != (multi_index_count(d, k),):
            raise ValueError("coefficient count does not match d and k")
        res = doc.get("grid_resolution")
        return ProjectedEstimate(
            beta_hat=beta,
            d=d,
            k=k,
            grid_resolution=None if res is None else int(res),
            pilot_kind=str(doc.get("pilot_kind", "")),
        )


def _resolution_from_count(d, n_points):
    m = 1
    while multi_index_count(d, m) < n_points:
        m += 1
    return m if multi_index_count(d, m) == n_points else None


class SimplexProjector:
    """Reusable projection pipeline for one (d, k, grid) combination."""

    def __init__(self, d, k, grid=None, resolution=None):
        if k < 2:
            raise ValueError("projection needs degree k >= 2")
        if grid is None:
            resolution = default_resolution(d) if resolution is None else int(resolution)
            grid = simplex_grid(d, resolution)
        else:
            grid = validate_simplex_points(grid, d)
            inferred = _resolution_from_count(d, len(grid))
            resolution = inferred if resolution is None else resolution
        p = multi_index_count(d, k)
        if len(grid) < MIN_POINT_RATIO * p:
            raise ValueError(
                f"grid has {len(grid)} points but degree k={k} needs at least "
                f"{int(MIN_POINT_RATIO * p)} (got p={p} coefficients); raise the grid "
                "resolution or lower k"
            )
        self.d, self.k = int(d), int(k)
        self.grid = grid
        self.grid_resolution = resolution
        self.constraints = build_constraints(d, k)
        self.design = basis_matrix(grid, k)
        self.problem = QpProblem(self.design, np.zeros(len(grid)), self.constraints)

    def project_values(self, values, pilot_kind="", warm_start=None):
        """Project grid values; returns (ProjectedEstimate, QpSolution)."""
        values = np.asarray(values, dtype=np.float64)
        solution = solve_qls(self.problem.with_targets(values), warm_start=warm_start)
        beta = np.clip(solution.beta_hat, 0.0, 1.0)
        report = check_feasible(beta, self.constraints, tol=1e-8)
        if not report.satisfied:
            raise NumericalError(
                f"projected coefficients violate the constraints by {report.worst_violation:.3e}"
            )
        estimate = ProjectedEstimate(
            beta_hat=beta,
            d=self.d,
            k=self.k,
            grid_resolution=self.grid_resolution,
            pilot_kind=pilot_kind,
        )
        return estimate, solution

    def project_pilot(self, pilot, warm_start=None):
        if pilot.grid.shape != self.grid.shape or not np.array_equal(pilot.grid, self.grid):
            raise ValueError("pilot grid does not match the projector grid")
        return self.project_values(pilot.values, pilot_kind=pilot.estimator_kind, warm_start=warm_start)


def project(pilot, k):
    """Project a pilot estimate onto the degree-k constrained family."""
    projector = SimplexProjector(pilot.grid.shape[1], k, grid=pilot.grid)
    estimate, _ = projector.project_pilot(pilot)
    return estimate


def extremal_coefficient(estimate):
    """d times the dependence function at the barycenter; 1 = complete dependence, d = independence."""
    if isinstance(estimate, ProjectedEstimate):
        return estimate.d * estimate.evaluate(barycenter(estimate.d))
    if isinstance(estimate, PilotEstimate):
        d = estimate.grid.shape[1]
        center = barycenter(d)
        hit = np.flatnonzero(np.all(np.abs(estimate.grid - center) <= 1e-12, axis=1))
        if len(hit) == 0:
            raise ValueError(
                "the pilot grid does not contain the barycenter; use a resolution divisible by d"
            )
        return d * float(estimate.values[hit[0]])
    raise TypeError(f"cannot compute an extremal coefficient from {type(estimate)!r}")


def select_degree(pilot, candidates=None, rel_improvement=0.01):
    """Sweep degrees, reporting discretized L2 distance to the pilot.

    Stops at the first degree whose successor improves the distance by less
    than ``rel_improvement`` (relatively).  Returns (chosen_k, table) with
    table rows (k, root-mean-square distance).
    """
    d = pilot.grid.shape[1]
    n_points = len(pilot.grid)
    if candidates is None:
        candidates = [
            k
            for k in range(2, 31)
            if multi_index_count(d, k) * MIN_POINT_RATIO <= n_points
        ]
    candidates = sorted(set(int(k) for k in candidates))
    if not candidates:
        raise ValueError("no admissible degree for this grid size")
    table = []
    chosen = candidates[-1]
    previous = None
    for k in candidates:
        estimate = project(pilot, k)
        dist = float(
            np.sqrt(np.mean((estimate.evaluate_on(pilot.grid) - pilot.values) ** 2))
        )
        table.append((k, dist))
        if previous is not None and previous - dist < rel_improvement * previous:
            chosen = table[-2][0]
            break
        previous = dist
    return chosen, table


def midpoint_convexity_gap(evaluate_fn, d, n_pairs=2000, seed=0):
    """Worst positive violation of f((w+w')/2) <= (f(w)+f(w'))/2 over random pairs."""
    rng = np.random.default_rng(seed)
    left = rng.dirichlet(np.ones(d), size=n_pairs)
    right = rng.dirichlet(np.ones(d), size=n_pairs)
    mid = 0.5 * (left + right)
    gap = evaluate_fn(mid) - 0.5 * (evaluate_fn(left) + evaluate_fn(right))
    return float(max(0.0, gap.max()))
