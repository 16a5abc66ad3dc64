"""
BV sampling toolkit.

Traces and generalized sampling functionals on generalized bounded-variation
spaces, their D^N-spline representatives, and exact solvers for
total-variation regularized problems with sampled data.
"""

__version__ = "0.1.0"

from .config import Config, SolveOptions
from .exceptions import (BVSamplingError, ConvergenceError, InfeasibleProblemError, LocalityError,
                         OrderMismatchError, ScaleGuardError, WellPosednessError)
from .extreme_points import enumerate_extreme_points
from .gbv_core import PolySpline, derivative_measure, eval_trace, gbv_norm, generalized_trace, greens, null_jet
from .measures import (Interval, PiecewiseLinearTestFunction, Side, SignedMeasure, cumulative, pair_continuous,
                       restrict, tv_norm)
from .oracle import oracle_solve
from .sampling import (Measurement, SamplingFunctional, apply, apply_all, continuity_bound,
                       weakstar_counterexample)
from .solver import (CandidateKnot, Loss, LossKind, Problem, Report, Solution, candidate_knots,
                     check_wellposedness, reduce_to_first_order, solve, solve_path)
from .systems import FundamentalSystem, kernel, kernel_derivative, kernel_sup, project_null, right_inverse

__all__ = [
    "BVSamplingError",
    "CandidateKnot",
    "Config",
    "ConvergenceError",
    "FundamentalSystem",
    "InfeasibleProblemError",
    "Interval",
    "LocalityError",
    "Loss",
    "LossKind",
    "Measurement",
    "OrderMismatchError",
    "PiecewiseLinearTestFunction",
    "PolySpline",
    "Problem",
    "Report",
    "SamplingFunctional",
    "ScaleGuardError",
    "Side",
    "SignedMeasure",
    "Solution",
    "SolveOptions",
    "WellPosednessError",
    "apply",
    "apply_all",
    "candidate_knots",
    "check_wellposedness",
    "continuity_bound",
    "cumulative",
    "derivative_measure",
    "enumerate_extreme_points",
    "eval_trace",
    "gbv_norm",
    "generalized_trace",
    "greens",
    "kernel",
    "kernel_derivative",
    "kernel_sup",
    "null_jet",
    "oracle_solve",
    "pair_continuous",
    "project_null",
    "reduce_to_first_order",
    "restrict",
    "right_inverse",
    "solve",
    "solve_path",
    "tv_norm",
    "weakstar_counterexample",
]
