import itertools

import numpy as np
import pytest

from madopick.bernstein import (
    basis_matrix,
    bernstein_operator,
    multi_index_count,
    simplex_grid,
)
from madopick.constraints import build_constraints, check_feasible
from madopick.errors import NumericalError
from madopick.models import symmetric_logistic, true_pickands
from madopick.qp import QpProblem, backend_name, kkt_report, solve_qls


def make_problem(d, k, targets_fn, resolution=None):
    grid = simplex_grid(d, resolution or (40 if d == 2 else 12))
    design = basis_matrix(grid, k)
    constraints = build_constraints(d, k)
    targets = targets_fn(grid)
    return QpProblem(design, targets, constraints), grid


def brute_force_minimum(problem, d, k, step=0.02):
    """Dense grid search over the feasible box with vertex coefficients pinned to 1.

    The 0.02 lattice is interleaved with a copy anchored at the 1 - 1/k bound so
    that optima sitting exactly on that constraint are representable.
    """
    assert d == 2
    p = multi_index_count(d, k)
    free = list(range(1, p - 1))  # first and last index are the pinned vertices
    base = np.arange(0.0, 1.0 + 1e-9, step)
    shifted = np.arange(1.0 - 1.0 / k, 1.0 + 1e-9, step)
    levels = np.unique(np.round(np.concatenate([base, shifted]), 12))
    mesh = np.meshgrid(*([levels] * len(free)), indexing="ij")
    combos = np.stack([m.ravel() for m in mesh], axis=1)
    betas = np.ones((len(combos), p))
    betas[:, free] = combos
    system = problem.constraints
    feasible = np.min(betas @ system.R.T - system.r, axis=1) >= -1e-12
    betas = betas[feasible]
    resid = betas @ problem.design.T - problem.targets
    objs = np.mean(resid**2, axis=1)
    best = int(np.argmin(objs))
    return float(objs[best]), betas[best]


class TestExactCases:
    def test_recovers_noise_free_feasible_coefficients(self):
        model = symmetric_logistic(3, 0.6)
        k = 6
        beta_star = bernstein_operator(lambda w: true_pickands(model, w), k, 3)
        problem, grid = make_problem(3, k, lambda g: basis_matrix(g, k) @ beta_star)
        solution = solve_qls(problem)
        assert np.max(np.abs(solution.beta_hat - beta_star)) <= 1e-8
        assert solution.kkt_residual <= 1e-8

    def test_constant_above_cap_projects_to_one(self):
        problem, _ = make_problem(2, 3, lambda g: np.full(len(g), 1.2))
        solution = solve_qls(problem)
        assert np.max(np.abs(solution.beta_hat - 1.0)) <= 1e-9
        # probing oracle: no feasible grid perturbation does better
        best = brute_force_minimum(problem, 2, 3, step=0.1)
        assert problem.objective(solution.beta_hat) <= best[0] + 1e-12

    def test_unconstrained_feasible_returns_least_squares(self):
        # exact values of a feasible polynomial make the LS optimum feasible
        model = symmetric_logistic(2, 0.55)
        k = 5
        beta_star = bernstein_operator(lambda w: true_pickands(model, w), k, 2)
        problem, grid = make_problem(2, k, lambda g: basis_matrix(g, k) @ beta_star)
        solution = solve_qls(problem)
        ls, *_ = np.linalg.lstsq(problem.design, problem.targets, rcond=None)
        assert check_feasible(ls, problem.constraints, tol=1e-9).satisfied
        assert np.max(np.abs(solution.beta_hat - ls)) <= 1e-8
        assert np.max(solution.multipliers) <= 1e-8


class TestOracle:
    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_matches_brute_force_grid_search(self, k):
        rng = np.random.default_rng(100 + k)
        problem, grid = make_problem(
            2, k, lambda g: np.clip(g.max(axis=1) + rng.normal(0, 0.15, len(g)), 0.0, 1.3)
        )
        solution = solve_qls(problem)
        best_obj, best_beta = brute_force_minimum(problem, 2, k)
        # the solver is a true minimizer: at least as good as any grid point,
        # and the grid optimum is within the discretization gap
        assert problem.objective(solution.beta_hat) <= best_obj + 1e-9
        assert best_obj - problem.objective(solution.beta_hat) <= 1e-3

    def test_feasible_direction_probing(self):
        rng = np.random.default_rng(7)
        model = symmetric_logistic(2, 0.8)
        problem, grid = make_problem(
            2,
            5,
            lambda g: np.clip(
                np.array([true_pickands(model, w) for w in g]) + rng.normal(0, 0.03, len(g)),
                0.0,
                1.2,
            ),
        )
        solution = solve_qls(problem)
        base = problem.objective(solution.beta_hat)
        system = problem.constraints
        # feasible directions live in the null space of the active normals
        active_rows = problem.normals[solution.active]
        _, singular, vh = np.linalg.svd(active_rows)
        null = vh[np.sum(singular > 1e-12) :]
        assert len(null) > 0
        tried = 0
        for _ in range(500):
            direction = null.T @ rng.normal(size=len(null))
            norm = np.linalg.norm(direction)
            if norm < 1e-12:
                continue
            candidate = solution.beta_hat + 1e-3 * direction / norm
            if np.min(system.R @ candidate - system.r) < -1e-12 or np.any(
                (candidate < -1e-12) | (candidate > 1 + 1e-12)
            ):
                continue
            tried += 1
            assert problem.objective(candidate) >= base - 1e-12
        assert tried > 0


class TestKktContract:
    def test_every_solve_meets_tolerances(self):
        rng = np.random.default_rng(11)
        for d, k in [(2, 4), (2, 8), (3, 4), (3, 7)]:
            problem, grid = make_problem(
                d, k, lambda g: np.clip(g.max(axis=1) + rng.normal(0, 0.1, len(g)), 0.0, 1.5)
            )
            solution = solve_qls(problem)
            report = kkt_report(solution, problem)
            assert report.stationarity <= 1e-8
            assert report.max_primal_violation <= 1e-10
            assert report.max_complementarity <= 1e-8
            assert np.min(solution.multipliers) >= 0.0

    def test_infeasible_probe_reports_violation(self):
        problem, _ = make_problem(2, 3, lambda g: g.max(axis=1))
        solution = solve_qls(problem)
        bad = solution.beta_hat.copy()
        bad[0] = 0.0  # break the vertex pin
        fake = type(solution)(
            beta_hat=bad,
            multipliers=solution.multipliers,
            iterations=solution.iterations,
            kkt_residual=solution.kkt_residual,
            active=solution.active,
            backend=solution.backend,
        )
        report = kkt_report(fake, problem)
        assert report.max_primal_violation > 0.5

    def test_monotone_improvement_over_ones(self):
        rng = np.random.default_rng(12)
        problem, grid = make_problem(
            3, 5, lambda g: np.clip(g.max(axis=1) + rng.normal(0, 0.2, len(g)), 0.0, 1.2)
        )
        solution = solve_qls(problem)
        ones = np.ones(problem.n_coefficients)
        assert problem.objective(solution.beta_hat) <= problem.objective(ones) + 1e-14


class TestRobustness:
    def test_determinism_is_bitwise(self):
        rng = np.random.default_rng(13)
        targets = None
        problem, grid = make_problem(
            3, 6, lambda g: np.clip(g.max(axis=1) + rng.normal(0, 0.15, len(g)), 0.0, 1.3)
        )
        first = solve_qls(problem)
        second = solve_qls(problem)
        assert first.beta_hat.tobytes() == second.beta_hat.tobytes()
        assert first.multipliers.tobytes() == second.multipliers.tobytes()

    def test_warm_start_agrees_with_cold(self):
        rng = np.random.default_rng(14)
        problem, grid = make_problem(
            3, 6, lambda g: np.clip(g.max(axis=1) + rng.normal(0, 0.15, len(g)), 0.0, 1.3)
        )
        cold = solve_qls(problem)
        noisy = problem.with_targets(
            np.clip(problem.targets + rng.normal(0, 0.02, problem.n_points), 0.0, 1.3)
        )
        warm = solve_qls(noisy, warm_start=cold)
        recomputed = solve_qls(noisy)
        assert np.max(np.abs(warm.beta_hat - recomputed.beta_hat)) <= 1e-10

    def test_iteration_cap_raises(self):
        rng = np.random.default_rng(15)
        problem, grid = make_problem(
            2, 4, lambda g: np.clip(g.max(axis=1) + rng.normal(0, 0.3, len(g)), 0.0, 1.5)
        )
        with pytest.raises(NumericalError):
            solve_qls(problem, max_iter=1)

    def test_under_determined_design_rejected(self):
        grid = simplex_grid(2, 3)  # 4 points < 6 coefficients
        with pytest.raises(ValueError):
            QpProblem(basis_matrix(grid, 5), np.zeros(len(grid)), build_constraints(2, 5))

    def test_rank_deficient_design_rejected(self):
        grid = simplex_grid(2, 4)
        dup = np.vstack([grid[:1]] * 20)  # 20 copies of one point
        design = basis_matrix(dup, 4)
        with pytest.raises(NumericalError, match="grid resolution|degree"):
            QpProblem(design, np.zeros(len(dup)), build_constraints(2, 4))

    def test_backend_name_is_reported(self):
        assert backend_name() in ("pure", "compiled")
        problem, _ = make_problem(2, 3, lambda g: g.max(axis=1))
        assert solve_qls(problem).backend == backend_name()
