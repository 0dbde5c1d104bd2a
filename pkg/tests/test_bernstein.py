import itertools
import math

import numpy as np
import pytest

from madopick.bernstein import (
    as_simplex_point,
    barycenter,
    basis_matrix,
    bernstein_basis,
    bernstein_operator,
    degree_raising_matrix,
    enumerate_multi_indices,
    evaluate_on_points,
    evaluate_polynomial,
    multi_index_count,
    multi_index_position,
    raise_degree,
    simplex_grid,
)


def brute_force_indices(d, k):
    return sorted(
        alpha for alpha in itertools.product(range(k + 1), repeat=d) if sum(alpha) == k
    )


def random_simplex_points(rng, d, size):
    return rng.dirichlet(np.ones(d), size=size)


class TestMultiIndices:
    def test_d3_k3_has_ten_indices(self):
        assert len(enumerate_multi_indices(3, 3)) == 10

    def test_d2_k1(self):
        idx = enumerate_multi_indices(2, 1)
        assert idx.tolist() == [[0, 1], [1, 0]]

    def test_d4_k5_matches_brute_force(self):
        idx = enumerate_multi_indices(4, 5)
        expected = brute_force_indices(4, 5)
        assert len(expected) == 56
        assert [tuple(row) for row in idx.tolist()] == expected

    @pytest.mark.parametrize("d", range(2, 7))
    @pytest.mark.parametrize("k", range(1, 13))
    def test_cardinality_formula(self, d, k):
        idx = enumerate_multi_indices(d, k)
        assert len(idx) == multi_index_count(d, k) == len(brute_force_indices(d, k))
        assert len({tuple(r) for r in idx.tolist()}) == len(idx)

    def test_ordering_is_lexicographic_and_deterministic(self):
        idx = enumerate_multi_indices(3, 4).tolist()
        assert idx == sorted(idx)
        assert idx[0] == [0, 0, 4]
        assert idx[-1] == [4, 0, 0]
        assert multi_index_position((1, 2, 1), 3, 4) == idx.index([1, 2, 1])

    @pytest.mark.parametrize("d,k", [(1, 3), (2, 0), (0, 1), (3, -1)])
    def test_domain_errors(self, d, k):
        with pytest.raises(ValueError):
            enumerate_multi_indices(d, k)


class TestBasis:
    def test_midpoint_d2_k2(self):
        values = bernstein_basis(np.array([0.5, 0.5]), 2)
        pos = multi_index_position((1, 1), 2, 2)
        assert values[pos] == pytest.approx(0.5, abs=1e-15)

    def test_vertex_is_indicator(self):
        for d, k in [(2, 3), (3, 5), (4, 2)]:
            for i in range(d):
                w = np.zeros(d)
                w[i] = 1.0
                values = bernstein_basis(w, k)
                alpha = tuple(k if j == i else 0 for j in range(d))
                pos = multi_index_position(alpha, d, k)
                expected = np.zeros(multi_index_count(d, k))
                expected[pos] = 1.0
                assert np.array_equal(values, expected)

    def test_center_d3_k3(self):
        values = bernstein_basis(barycenter(3), 3)
        pos = multi_index_position((1, 1, 1), 3, 3)
        assert values[pos] == pytest.approx(2.0 / 9.0, rel=1e-13)

    def test_partition_of_unity_and_nonnegativity(self):
        rng = np.random.default_rng(20240901)
        for d in (2, 3, 4):
            pts = random_simplex_points(rng, d, 1000 // 2)
            for k in range(1, 21):
                mat = basis_matrix(pts, k)
                assert np.all(mat >= 0.0)
                assert np.max(np.abs(mat.sum(axis=1) - 1.0)) <= 1e-12

    def test_multinomial_coefficients_match_exact_integers(self):
        # gammaln-based normalization must agree with exact factorials for k <= 20
        for d, k in [(2, 20), (3, 14), (4, 9)]:
            alphas = enumerate_multi_indices(d, k)
            w = barycenter(d)
            values = bernstein_basis(w, k)
            for alpha, got in zip(alphas.tolist(), values):
                coef = math.factorial(k)
                for a in alpha:
                    coef //= math.factorial(a)
                exact = coef * float(d) ** (-k)
                assert got == pytest.approx(exact, rel=1e-12)

    def test_invalid_point_rejected(self):
        with pytest.raises(ValueError):
            bernstein_basis(np.array([0.5, 0.6]), 2)
        with pytest.raises(ValueError):
            as_simplex_point(np.array([1.2, -0.2]))


class TestEvaluation:
    def test_all_ones_is_constant_one(self):
        rng = np.random.default_rng(7)
        for d, k in [(2, 4), (3, 6)]:
            beta = np.ones(multi_index_count(d, k))
            pts = random_simplex_points(rng, d, 50)
            assert np.max(np.abs(evaluate_on_points(beta, pts, k) - 1.0)) <= 1e-12

    def test_vertex_interpolation_is_exact(self):
        rng = np.random.default_rng(8)
        d, k = 3, 5
        beta = rng.uniform(size=multi_index_count(d, k))
        for i in range(d):
            w = np.zeros(d)
            w[i] = 1.0
            alpha = tuple(k if j == i else 0 for j in range(d))
            assert evaluate_polynomial(beta, w, k) == beta[multi_index_position(alpha, d, k)]

    def test_edge_example_d2_k2(self):
        beta = np.array([1.0, 0.75, 1.0])  # alpha_1 = 0, 1, 2
        assert evaluate_polynomial(beta, np.array([0.5, 0.5]), 2) == pytest.approx(0.875)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            evaluate_polynomial(np.ones(4), np.array([0.5, 0.5]), 2)


class TestOperator:
    def test_constant_function(self):
        beta = bernstein_operator(lambda w: 1.0, 4, 3)
        assert np.array_equal(beta, np.ones(multi_index_count(3, 4)))

    def test_reproduces_affine_functions(self):
        beta = bernstein_operator(lambda w: w[0], 3, 2)
        assert np.allclose(beta, [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0])
        grid = simplex_grid(2, 60)
        assert np.max(np.abs(evaluate_on_points(beta, grid, 3) - grid[:, 0])) <= 1e-12

    def test_sup_error_bound_for_lipschitz_pickands(self):
        # max(w) is a valid Pickands function and Lipschitz-1 on the simplex
        f = lambda w: float(np.max(w))
        d = 3
        grid = simplex_grid(d, 40)
        truth = grid.max(axis=1)
        for k in (4, 9, 16):
            beta = bernstein_operator(f, k, d)
            approx = evaluate_on_points(beta, grid, k)
            assert np.max(np.abs(approx - truth)) <= d / (2.0 * math.sqrt(k))


class TestDegreeRaising:
    def test_d2_k1_formula(self):
        b0, b1 = 0.3, 0.9
        raised = raise_degree(np.array([b0, b1]), 2, 1)
        assert np.allclose(raised, [b0, (b0 + b1) / 2.0, b1], atol=1e-15)

    def test_all_ones_stays_all_ones(self):
        for d, k in [(2, 3), (3, 4)]:
            raised = raise_degree(np.ones(multi_index_count(d, k)), d, k)
            assert np.max(np.abs(raised - 1.0)) <= 1e-14

    def test_function_invariance_on_dense_grid(self):
        rng = np.random.default_rng(99)
        d, k = 3, 4
        beta = rng.uniform(size=multi_index_count(d, k))
        raised = raise_degree(beta, d, k)
        grid = simplex_grid(d, 30)
        low = evaluate_on_points(beta, grid, k)
        high = evaluate_on_points(raised, grid, k + 1)
        assert np.max(np.abs(low - high)) <= 1e-12

    def test_matrix_rows_sum_to_one(self):
        mat = degree_raising_matrix(3, 5)
        assert np.allclose(mat.sum(axis=1), 1.0, atol=1e-15)


class TestGrid:
    def test_edge_grid(self):
        grid = simplex_grid(2, 4)
        assert np.allclose(sorted(grid[:, 0]), [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_d3_m2_by_hand(self):
        grid = simplex_grid(3, 2)
        expected = np.array(
            [[0, 0, 2], [0, 1, 1], [0, 2, 0], [1, 0, 1], [1, 1, 0], [2, 0, 0]]
        ) / 2.0
        assert np.array_equal(grid, expected)

    def test_d3_m50_count(self):
        assert len(simplex_grid(3, 50)) == 1326

    def test_contains_all_vertices(self):
        grid = simplex_grid(4, 3)
        for i in range(4):
            vertex = np.zeros(4)
            vertex[i] = 1.0
            assert np.any(np.all(grid == vertex, axis=1))

    def test_rejects_bad_resolution(self):
        with pytest.raises(ValueError):
            simplex_grid(3, 0)
