"""Constrained least-squares projection problems and their dual active-set solution.

The problem is  min_beta (1/Q) sum_q (design_q . beta - target_q)^2  subject to
R beta >= r (a :class:`~madopick.constraints.ConstraintSystem`) and the box
0 <= beta <= 1.  The multiplier vector covers the stacked rows in the order
(constraint rows, lower box, upper box).

Two interchangeable backends implement the iteration: a Cython extension
(:mod:`madopick._activeset_ext`, built at install time) and a pure-numpy twin
(:mod:`madopick._activeset`).  The extension is used when importable unless
the ``MADOPICK_PURE`` environment variable is set; ``backend_name()`` reports
the choice.  Results are deterministic for fixed inputs within a backend.
"""

import os
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.optimize import nnls

from . import _activeset
from .errors import NumericalError

if os.environ.get("MADOPICK_PURE"):
    _backend = _activeset
else:
    try:
        from . import _activeset_ext as _backend
    except ImportError:
        _backend = _activeset

#: condition estimate above which the normal matrix gets a recorded ridge
RIDGE_CONDITION = 1e12
RIDGE_VALUE = 1e-10
#: condition estimate treated as rank deficiency
RANK_DEFICIENT_CONDITION = 1e15

PRIMAL_TOL = 1e-10
STATIONARITY_TOL = 1e-8
COMPLEMENTARITY_TOL = 1e-8


def backend_name():
    """Which active-set implementation is in use: "compiled" or "pure"."""
    return "pure" if _backend is _activeset else "compiled"


class QpProblem:
    """A projection problem with cached factorizations, reusable across target vectors."""

    def __init__(self, design, targets, constraints):
        design = np.ascontiguousarray(design, dtype=np.float64)
        targets = np.asarray(targets, dtype=np.float64)
        n_points, n_coef = design.shape
        if n_coef != constraints.R.shape[1]:
            raise ValueError(
                f"design has {n_coef} columns but the constraint system expects "
                f"{constraints.R.shape[1]}"
            )
        if targets.shape != (n_points,):
            raise ValueError("need one target value per design row")
        if n_points < n_coef:
            raise ValueError(
                f"problem must be over-determined: {n_points} rows < {n_coef} coefficients"
            )
        self.design = design
        self.targets = targets
        self.constraints = constraints

        gram = (2.0 / n_points) * (design.T @ design)
        condition = float(np.linalg.cond(gram))
        self.ridge_applied = False
        if not np.isfinite(condition) or condition > RANK_DEFICIENT_CONDITION:
            raise NumericalError(
                f"design matrix is numerically rank-deficient (condition ~ {condition:.2e}); "
                "increase the grid resolution (more points Q) or reduce the degree k"
            )
        if condition > RIDGE_CONDITION:
            gram = gram + RIDGE_VALUE * np.eye(n_coef)
            self.ridge_applied = True
        self.condition = condition
        try:
            chol = np.linalg.cholesky(gram)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(
                "normal matrix is not positive definite; increase the grid resolution "
                "or reduce the degree k"
            ) from exc
        self.gram = gram
        self._inv_chol_t = np.ascontiguousarray(
            solve_triangular(chol, np.eye(n_coef), lower=True, trans="T")
        )
        self.normals = np.ascontiguousarray(
            np.vstack([constraints.R, np.eye(n_coef), -np.eye(n_coef)])
        )
        self.bounds = np.concatenate(
            [constraints.r, np.zeros(n_coef), -np.ones(n_coef)]
        )

    @property
    def n_coefficients(self):
        return self.design.shape[1]

    @property
    def n_points(self):
        return self.design.shape[0]

    @property
    def n_constraints(self):
        return self.normals.shape[0]

    def with_targets(self, targets):
        """Cheap copy sharing all factorizations, with a new target vector."""
        targets = np.asarray(targets, dtype=np.float64)
        if targets.shape != (self.n_points,):
            raise ValueError("need one target value per design row")
        clone = object.__new__(QpProblem)
        clone.__dict__.update(self.__dict__)
        clone.targets = targets
        return clone

    def linear_term(self, targets=None):
        y = self.targets if targets is None else targets
        return (2.0 / self.n_points) * (self.design.T @ y)

    def objective(self, beta):
        resid = self.design @ np.asarray(beta) - self.targets
        return float(resid @ resid) / self.n_points

    def gradient(self, beta):
        return self.gram @ np.asarray(beta) - self.linear_term()


@dataclass(frozen=True)
class QpSolution:
    beta_hat: np.ndarray
    multipliers: np.ndarray
    iterations: int
    kkt_residual: float
    active: np.ndarray
    backend: str


@dataclass(frozen=True)
class KktReport:
    stationarity: float
    max_primal_violation: float
    max_complementarity: float
    active_set_size: int


def _metrics(problem, x, u_full):
    grad = problem.gram @ x - problem.linear_term()
    stationarity = float(np.max(np.abs(grad - problem.normals.T @ u_full)))
    slack = problem.normals @ x - problem.bounds
    primal = float(max(0.0, -slack.min()))
    comp = float(np.max(np.abs(u_full * slack))) if len(slack) else 0.0
    return stationarity, primal, comp


def _scatter(u_active, active, m):
    full = np.zeros(m)
    if len(active):
        full[active] = u_active
    return full


def solve_qls(problem, warm_start=None, max_iter=None):
    """Solve the constrained least-squares problem to KKT accuracy.

    ``warm_start`` may be a previous :class:`QpSolution` (its active set seeds
    the iteration) or an iterable of constraint indices.  Raises
    :class:`~madopick.errors.NumericalError` if the iteration cap is exceeded
    or the stated tolerances cannot be met.
    """
    if max_iter is None:
        max_iter = 10 * (problem.n_constraints + problem.n_coefficients)
    warm = None
    if warm_start is not None:
        warm = np.asarray(
            warm_start.active if isinstance(warm_start, QpSolution) else warm_start,
            dtype=np.int64,
        )
    a = problem.linear_term()

    def score(candidate):
        stationarity, primal, comp = _metrics(problem, *candidate[:2])
        return max(
            stationarity / STATIONARITY_TOL, primal / PRIMAL_TOL, comp / COMPLEMENTARITY_TOL
        )

    total_iters = 0
    best = None
    # long runs on degenerate problems accumulate drift that a polish from
    # fresh factorizations cannot always remove (the active-set equality
    # system is nearly singular there); restarting the iteration from the
    # polished active set re-converges in a handful of drift-free steps
    for _ in range(4):
        x, u_act, active, iters, status = _backend.gi_solve(
            problem._inv_chol_t, a, problem.normals, problem.bounds, int(max_iter), warm
        )
        total_iters += int(iters)
        x = np.asarray(x)
        u_act = np.asarray(u_act)
        active = np.asarray(active, dtype=np.int64)
        if status == _activeset.MAX_ITER:
            raise NumericalError(
                f"active-set iteration cap {max_iter} exceeded "
                f"({len(active)} active constraints, backend {backend_name()})"
            )
        if status == _activeset.INFEASIBLE:
            raise NumericalError(
                "no feasible step found; constraint system looks inconsistent"
            )
        candidates = [
            (x, _scatter(np.maximum(u_act, 0.0), active, problem.n_constraints), active)
        ]
        polished = _activeset.polish(
            problem._inv_chol_t, a, problem.normals, problem.bounds, active, gram=problem.gram
        )
        if polished is not None:
            px, pu, pact = polished
            if len(pu) and pu.min() < -1e-12:
                # nearly dependent normals: recover a nonnegative multiplier
                # decomposition of minimum residual
                pu, _ = nnls(problem.normals[pact].T, problem.gram @ px - a)
            candidates.append(
                (px, _scatter(np.maximum(pu, 0.0), pact, problem.n_constraints), pact)
            )
        round_best = min(candidates, key=score)
        if best is None or score(round_best) < score(best):
            best = round_best
        if score(best) <= 1.0:
            break
        # degenerate optima admit multiplier decompositions over rows our
        # active list misses; rebuild the duals over all near-active rows
        for bx, _, _ in list(candidates):
            slack = problem.normals @ bx - problem.bounds
            near = np.flatnonzero(slack <= 1e-9)
            if len(near) == 0:
                continue
            repaired, _ = nnls(problem.normals[near].T, problem.gram @ bx - a)
            candidates.append((bx, _scatter(repaired, near, problem.n_constraints), near))
        round_best = min(candidates, key=score)
        if score(round_best) < score(best):
            best = round_best
        if score(best) <= 1.0:
            break
        warm = best[2]

    stationarity, primal, comp = _metrics(problem, *best[:2])
    if stationarity > STATIONARITY_TOL or primal > PRIMAL_TOL or comp > COMPLEMENTARITY_TOL:
        raise NumericalError(
            "solver did not reach the required accuracy: "
            f"stationarity={stationarity:.3e}, primal violation={primal:.3e}, "
            f"complementarity={comp:.3e}"
        )
    x, u_full, active = best
    iters = total_iters
    return QpSolution(
        beta_hat=x,
        multipliers=u_full,
        iterations=int(iters),
        kkt_residual=stationarity,
        active=np.sort(np.asarray(active, dtype=np.int64)),
        backend=backend_name(),
    )


def kkt_report(solution, problem):
    """Stationarity / primal feasibility / complementarity diagnostics for a solve."""
    stationarity, primal, comp = _metrics(problem, solution.beta_hat, solution.multipliers)
    return KktReport(
        stationarity=stationarity,
        max_primal_violation=primal,
        max_complementarity=comp,
        active_set_size=int(len(solution.active)),
    )
