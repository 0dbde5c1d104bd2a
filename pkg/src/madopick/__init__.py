"""Nonparametric Pickands dependence function estimation on the unit simplex.

Pipeline: a rank-based multivariate madogram pilot estimate on a simplex grid,
projected onto the shape-constrained Bernstein-Bezier polynomial family
(convexity, vertex values, lower/upper bounds) by constrained least squares,
with bootstrap confidence bands and a Monte-Carlo benchmark harness.
"""

from .bernstein import (
    basis_matrix,
    bernstein_basis,
    bernstein_operator,
    enumerate_multi_indices,
    evaluate_on_points,
    evaluate_polynomial,
    multi_index_count,
    raise_degree,
    simplex_grid,
)
from .constraints import ConstraintSystem, build_constraints, check_feasible
from .errors import DataError, MadopickError, NumericalError
from .estimators import (
    MadogramValue,
    PilotEstimate,
    ecdf,
    empirical_madogram,
    estimate_pickands_classical,
    estimate_pickands_md,
    madogram_to_pickands,
    theoretical_madogram,
)
from .models import ModelSpec, asymmetric_logistic, huesler_reiss, sample, symmetric_logistic, true_pickands
from .projection import ProjectedEstimate, SimplexProjector, extremal_coefficient, project
from .qp import QpProblem, QpSolution, kkt_report, solve_qls
from .bootstrap import (
    CoefficientEnsemble,
    ConfidenceBand,
    PointwiseBand,
    bootstrap_coefficients,
    pointwise_band,
    simultaneous_band,
)

__version__ = "0.1.0"

__all__ = [
    "ConstraintSystem",
    "CoefficientEnsemble",
    "ConfidenceBand",
    "DataError",
    "MadogramValue",
    "MadopickError",
    "ModelSpec",
    "NumericalError",
    "PilotEstimate",
    "PointwiseBand",
    "ProjectedEstimate",
    "QpProblem",
    "QpSolution",
    "SimplexProjector",
    "asymmetric_logistic",
    "basis_matrix",
    "bernstein_basis",
    "bernstein_operator",
    "bootstrap_coefficients",
    "build_constraints",
    "check_feasible",
    "ecdf",
    "empirical_madogram",
    "enumerate_multi_indices",
    "estimate_pickands_classical",
    "estimate_pickands_md",
    "evaluate_on_points",
    "evaluate_polynomial",
    "extremal_coefficient",
    "huesler_reiss",
    "kkt_report",
    "madogram_to_pickands",
    "multi_index_count",
    "pointwise_band",
    "project",
    "raise_degree",
    "sample",
    "simplex_grid",
    "simultaneous_band",
    "solve_qls",
    "symmetric_logistic",
    "theoretical_madogram",
    "true_pickands",
]
