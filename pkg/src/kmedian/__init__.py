"""Approximation toolkit for metric k-median.

The pipeline builds a fractional bi-point solution with a Lagrangian
facility-location subroutine, rounds it into a solution that may open a few
facilities beyond k, and converts such pseudo-solutions back into true
k-facility solutions by sparsifying the instance. Exact brute-force oracles,
instance generators, file formats, a CLI, and a scikit-learn style estimator
round out the package.
"""

from .bipoint import BiPoint, DualState, bipoint_solve, fractional_cost, lmp_solve
from .estimator import KMedian
from .fileio import MetricWarning, ParseError, read_instance, write_instance
from .generators import gen_euclidean, gen_gap
from .instance import (BallQuery, FacilitySet, Instance, KMedianError,
                       ValidationReport, Violation, ball, cball, cost,
                       facility_set, fball, nearest, validate)
from .oracle import GuardExceeded, OracleResult, best_additive, brute_force
from .sparsify import (PipelineParams, ResidualInstance, SolveReport,
                       dense_pair_sequence, density, enumerate_residuals,
                       is_sparse, pseudo_budget_bound, select_params, solve,
                       solve_detailed, transform)
from .stars import (BALANCE_RATIO, KNAPSACK_A_MAX, OPEN_F1_A_MIN,
                    RoundingOutcome, StarDecomposition, build_stars,
                    check_balance, grouped_budget, knapsack_lp, pseudo_approx,
                    round_grouped, round_knapsack, round_open_f1)

__version__ = "0.1.0"

__all__ = [
    "BALANCE_RATIO", "BallQuery", "BiPoint", "DualState", "FacilitySet",
    "GuardExceeded", "Instance", "KMedian", "KMedianError", "KNAPSACK_A_MAX",
    "MetricWarning", "OPEN_F1_A_MIN", "OracleResult", "ParseError",
    "PipelineParams", "ResidualInstance", "RoundingOutcome", "SolveReport",
    "StarDecomposition", "ValidationReport", "Violation",
    "ball", "best_additive", "bipoint_solve", "brute_force", "build_stars",
    "cball", "check_balance", "cost", "dense_pair_sequence", "density",
    "enumerate_residuals", "facility_set", "fball", "fractional_cost",
    "gen_euclidean", "gen_gap", "grouped_budget", "is_sparse", "knapsack_lp",
    "lmp_solve", "nearest", "pseudo_approx", "pseudo_budget_bound",
    "read_instance", "round_grouped", "round_knapsack", "round_open_f1",
    "select_params", "solve", "solve_detailed", "transform", "validate",
    "write_instance",
]
