"""Linear inequality system making a Bernstein-Bezier polynomial a valid dependence function.

The system R beta >= r stacks three blocks over coefficient vectors in the
canonical (lexicographic) multi-index ordering of :mod:`madopick.bernstein`:

convexity
    Weak diagonal dominance of the coefficient Hessian: for every multi-index
    of degree k-2 and every direction i, the pure second difference dominates
    the sum of absolute mixed differences.  Absolute values are linearized by
    enumerating all 2^(d-2) sign patterns, giving p_{k-2} * (d-1) * 2^(d-2)
    rows with zero right-hand side.  (Sufficient, not necessary, for convexity.)
vertex_value
    Coefficient = 1 at the d vertex indices, written as +/- inequality pairs
    (2d rows, right-hand sides alternating +1, -1).
lower_bound
    Coefficient >= 1 - 1/k at the d(d-1) indices neighbouring the vertices,
    which (given the other blocks) forces the polynomial above max(w_1..w_d).

Differences are taken in the d-entry index form, where the paper-style shift
"v_0" acts as +e_d: Delta_{s,0} beta_alpha = beta_{alpha+e_s} - beta_{alpha+e_d}.
"""

import csv
import itertools
from dataclasses import dataclass

import numpy as np

from .bernstein import enumerate_multi_indices, multi_index_count, _index_positions

BLOCK_NAMES = ("convexity", "vertex_value", "lower_bound")


@dataclass(frozen=True)
class ConstraintSystem:
    R: np.ndarray
    r: np.ndarray
    block_spans: tuple
    d: int
    k: int

    @property
    def n_rows(self):
        return self.R.shape[0]

    def block(self, name):
        lo, hi = dict(zip(BLOCK_NAMES, self.block_spans))[name]
        return self.R[lo:hi], self.r[lo:hi]


@dataclass(frozen=True)
class FeasibilityReport:
    satisfied: bool
    worst_violation: float
    block_violations: dict


def expected_row_count(d, k):
    return multi_index_count(d, k - 2) * (d - 1) * 2 ** (d - 2) + 2 * d + d * (d - 1)


def _unit(d, axis):
    e = np.zeros(d, dtype=np.int64)
    e[axis] = 1
    return e


def build_constraints(d, k):
    """Assemble (R, r) for dimension d >= 2 and degree k >= 2."""
    if d < 2:
        raise ValueError("dimension must be >= 2")
    if k < 2:
        raise ValueError("second differences need degree k >= 2")
    p = multi_index_count(d, k)
    pos = _index_positions(d, k)
    e_last = _unit(d, d - 1)

    def shift(alpha, direction):
        # paper-style direction: 0 acts on the implicit last coordinate
        return alpha + (e_last if direction == 0 else _unit(d, direction - 1))

    def second_difference(alpha, i, row, coef=1.0):
        row[pos[tuple(alpha + 2 * _unit(d, i - 1))]] += coef
        row[pos[tuple(shift(alpha, i) + e_last)]] -= 2.0 * coef
        row[pos[tuple(alpha + 2 * e_last)]] += coef

    def mixed_difference(alpha, i, j, row, coef=1.0):
        row[pos[tuple(shift(alpha, i) + _unit(d, j - 1))]] += coef
        row[pos[tuple(shift(alpha, j) + e_last)]] -= coef
        row[pos[tuple(shift(alpha, i) + e_last)]] -= coef
        row[pos[tuple(alpha + 2 * e_last)]] += coef

    if k == 2:
        second_diff_lattice = np.zeros((1, d), dtype=np.int64)
    else:
        second_diff_lattice = enumerate_multi_indices(d, k - 2)
    convexity = []
    for alpha in second_diff_lattice:
        for i in range(1, d):
            cross = [j for j in range(1, d) if j != i]
            for signs in itertools.product((1.0, -1.0), repeat=len(cross)):
                row = np.zeros(p)
                second_difference(alpha, i, row)
                for j, s in zip(cross, signs):
                    mixed_difference(alpha, i, j, row, coef=-s)
                convexity.append(row)

    vertex_rows, vertex_rhs = [], []
    for axis in [d - 1] + list(range(d - 1)):
        position = pos[tuple(k * _unit(d, axis))]
        for sign in (1.0, -1.0):
            row = np.zeros(p)
            row[position] = sign
            vertex_rows.append(row)
            vertex_rhs.append(sign)

    lower_indices = []
    for group in (
        [_unit(d, i) + (k - 1) * e_last for i in range(d - 1)],
        [(k - 1) * _unit(d, i) + e_last for i in range(d - 1)],
        [
            (k - 1) * _unit(d, i) + _unit(d, j)
            for i in range(d - 1)
            for j in range(d - 1)
            if j != i
        ],
    ):
        lower_indices.extend(sorted(tuple(a) for a in group))
    lower_rows = []
    for alpha in lower_indices:
        row = np.zeros(p)
        row[pos[alpha]] = 1.0
        lower_rows.append(row)

    blocks = [np.array(convexity), np.array(vertex_rows), np.array(lower_rows)]
    rhs = [
        np.zeros(len(convexity)),
        np.array(vertex_rhs),
        np.full(len(lower_rows), 1.0 - 1.0 / k),
    ]
    sizes = np.array([len(b) for b in blocks])
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    spans = tuple((int(bounds[i]), int(bounds[i + 1])) for i in range(3))
    big_r = np.vstack(blocks)
    big_rhs = np.concatenate(rhs)
    assert big_r.shape == (expected_row_count(d, k), p)
    big_r.setflags(write=False)
    big_rhs.setflags(write=False)
    return ConstraintSystem(R=big_r, r=big_rhs, block_spans=spans, d=d, k=k)


def check_feasible(beta, system, tol=1e-8):
    """Evaluate R beta - r (and the [0, 1] box) and report per-block worst violations."""
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape != (system.R.shape[1],):
        raise ValueError(f"coefficient vector must have length {system.R.shape[1]}")
    slack = system.R @ beta - system.r
    violations = {}
    for name, (lo, hi) in zip(BLOCK_NAMES, system.block_spans):
        violations[name] = float(max(0.0, -slack[lo:hi].min())) if hi > lo else 0.0
    violations["box"] = float(max(0.0, -beta.min(), beta.max() - 1.0))
    worst = max(violations.values())
    return FeasibilityReport(satisfied=worst <= tol, worst_violation=worst, block_violations=violations)


def dump_constraints_csv(system, path):
    """Write the stacked system to CSV for external verification (one row per constraint)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        p = system.R.shape[1]
        writer.writerow(["block"] + [f"beta_{i}" for i in range(p)] + ["rhs"])
        for name, (lo, hi) in zip(BLOCK_NAMES, system.block_spans):
            for row in range(lo, hi):
                writer.writerow(
                    [name]
                    + [repr(float(v)) for v in system.R[row]]
                    + [repr(float(system.r[row]))]
                )
