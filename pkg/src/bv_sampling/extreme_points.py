"""Exhaustive enumeration of the sparse extreme points of a solution set."""
import logging
from dataclasses import replace
from itertools import combinations
from typing import List, Optional

import numpy as np

from .config import SolveOptions
from .exceptions import ScaleGuardError
from .solver import (Design, LossKind, Problem, Report, Solution, assemble_spline, build_design, candidate_knots,
                     objective, solve, solve_basis_pursuit, vet_problem)

logger = logging.getLogger(__name__)

MAX_MEASUREMENTS = 4
MAX_CANDIDATES = 16
COST_TOL = 1e-9


def _independent_columns(H: np.ndarray) -> List[int]:
    """Greedy maximal set of linearly independent columns, left to right."""
    kept: List[int] = []
    for j in range(H.shape[1]):
        trial = kept + [j]
        if np.linalg.matrix_rank(H[:, trial]) == len(trial):
            kept = trial
    return kept


def _target(problem: Problem, opts: SolveOptions) -> np.ndarray:
    """Data the extreme points must reproduce: y itself, or the unique optimal fit of the penalized problem."""
    if problem.loss.kind is LossKind.INTERPOLATION:
        return np.asarray(problem.y, dtype=float)
    fitted = solve(problem, opts)
    return np.asarray(problem.y, dtype=float) + np.asarray(fitted.residuals, dtype=float)


def enumerate_extreme_points(problem: Problem,
                             max_support: Optional[int] = None,
                             opts: Optional[SolveOptions] = None) -> List[Solution]:
    """
    Enumerate the extreme points of the set of optimal splines.

    The squared loss has a unique optimal fit, so its solution set is the set of
    minimum-TV splines reproducing that fit. Vertices are the feasible,
    cost-optimal supports whose columns, together with the visible null
    directions, are linearly independent.

    Args:
        problem (Problem): A problem with at most 4 measurements.
        max_support (Optional[int]): Largest support size tried; defaults to M.
        opts (Optional[SolveOptions]): Solver options.

    Returns:
        List[Solution]: One solution per extreme point, each with at most M knots.

    Raises:
        ScaleGuardError: If M > 4 or more than 16 distinct candidate knots remain.
        InfeasibleProblemError: If the constraints cannot be met.
    """
    opts = opts or SolveOptions()
    if problem.size > MAX_MEASUREMENTS:
        raise ScaleGuardError(f"Extreme-point enumeration is limited to {MAX_MEASUREMENTS} measurements, got {problem.size}")
    report = vet_problem(problem, opts)
    design = build_design(problem, [c.position for c in candidate_knots(problem)])
    if design.A.shape[1] > MAX_CANDIDATES:
        raise ScaleGuardError(f"Extreme-point enumeration is limited to {MAX_CANDIDATES} candidates, "
                              f"got {design.A.shape[1]}")
    max_support = problem.size if max_support is None else max_support
    if max_support < 0:
        raise ValueError(f"max_support must be nonnegative, got {max_support}")

    target = _target(problem, opts)
    _, optimal_weights = solve_basis_pursuit(design.H, design.A, target, opts.tol)
    optimum = float(np.abs(optimal_weights).sum())

    basis = _independent_columns(design.H)
    if len(basis) < design.H.shape[1]:
        report = report.with_warning("visible null directions are linearly dependent on the data; "
                                     "extreme points are enumerated modulo that dependence")
    if report.invisible_null_directions:
        report = report.with_warning("extreme points are enumerated modulo the invisible null directions")
    H = design.H[:, basis]
    scale = max(1.0, float(np.linalg.norm(target)))

    vertices: List[Solution] = []
    K = design.A.shape[1]
    for size in range(0, min(max_support, K) + 1):
        for support in combinations(range(K), size):
            system = np.hstack([H, design.A[:, list(support)]])
            if system.shape[1] and np.linalg.matrix_rank(system) < system.shape[1]:
                continue
            if system.shape[1]:
                coefficients = np.linalg.lstsq(system, target, rcond=None)[0]
            else:
                coefficients = np.zeros(0)
            if np.linalg.norm(system @ coefficients - target) > COST_TOL * scale:
                continue
            weights = coefficients[len(basis):]
            if np.any(np.abs(weights) <= opts.tol):
                continue
            if abs(float(np.abs(weights).sum()) - optimum) > COST_TOL * max(1.0, optimum):
                continue
            vertices.append(_vertex(problem, design, basis, coefficients, list(support), opts, report))
    logger.info(f"Found {len(vertices)} extreme points (optimal TV {optimum:.12g})")
    return vertices


def _vertex(problem: Problem, design: Design, basis: List[int], coefficients: np.ndarray, support: List[int],
            opts: SolveOptions, report: Report) -> Solution:
    null_visible = np.zeros(design.H.shape[1])
    null_visible[basis] = coefficients[:len(basis)]
    weights = np.zeros(design.A.shape[1])
    weights[support] = coefficients[len(basis):]
    spline = assemble_spline(problem, design, null_visible, weights, opts.tol)
    cost, residuals = objective(problem, spline)
    return Solution(spline, cost, spline.knot_count, residuals, replace(report, seed=opts.seed))
