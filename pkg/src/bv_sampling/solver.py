"""Resolution of min_f E(nu(f), y) + lambda ||D^N f||_M over splines.

For measurements made only of top-order traces D^{N-1} delta_t^+-, the response
of a knot u_N(. - tau) depends on tau only through which side of each abscissa
it falls on. Knot positions therefore collapse into finitely many activation
classes, and the continuous problem reduces exactly to a finite lasso (squared
loss) or a linear program (interpolation) over one representative per class.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog

from .config import SolveOptions
from .exceptions import (ConvergenceError, InfeasibleProblemError, OrderMismatchError,
                         WellPosednessError)
from .gbv_core import PolySpline, check_order, derivative_measure, greens
from .measures import Interval, Side, tv_norm
from .sampling import Measurement, apply_all
from .systems import FundamentalSystem

logger = logging.getLogger(__name__)

MODE_EXACT = "exact"
MODE_GRID = "grid-approximate"


class LossKind(str, Enum):
    SQUARED = "squared"
    INTERPOLATION = "interpolation"


@dataclass(frozen=True)
class Loss:
    """Data term: weighted squares sum_m w_m r_m^2, or hard interpolation nu(f) = y."""

    kind: LossKind = LossKind.SQUARED
    weights: Optional[Tuple[float, ...]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", LossKind(self.kind))
        if self.weights is not None:
            if self.kind is LossKind.INTERPOLATION:
                raise ValueError("Interpolation loss takes no weights")
            weights = tuple(float(w) for w in self.weights)
            if any(not (math.isfinite(w) and w > 0) for w in weights):
                raise ValueError(f"Squared-loss weights must be finite and strictly positive, got {weights}")
            object.__setattr__(self, "weights", weights)

    @classmethod
    def squared(cls, weights: Optional[Sequence[float]] = None) -> "Loss":
        return cls(LossKind.SQUARED, None if weights is None else tuple(weights))

    @classmethod
    def interpolation(cls) -> "Loss":
        return cls(LossKind.INTERPOLATION)

    def weight_vector(self, count: int) -> np.ndarray:
        if self.weights is None:
            return np.ones(count)
        if len(self.weights) != count:
            raise ValueError(f"Expected {count} loss weights, got {len(self.weights)}")
        return np.asarray(self.weights, dtype=float)

    def evaluate(self, residuals: Sequence[float]) -> float:
        """Data term value; the interpolation loss contributes nothing to the cost."""
        if self.kind is LossKind.INTERPOLATION:
            return 0.0
        weights = self.weight_vector(len(residuals))
        return math.fsum(float(w) * r * r for w, r in zip(weights, residuals))


@dataclass(frozen=True)
class Problem:
    """Measurement model, data, loss and regularization weight."""

    order: int
    measurements: Tuple[Measurement, ...]
    y: Tuple[float, ...]
    loss: Loss = field(default_factory=Loss)
    lam: float = 1.0
    system: Optional[FundamentalSystem] = None
    grid: Optional[Tuple[float, ...]] = None

    def __post_init__(self) -> None:
        order = check_order(self.order)
        measurements = tuple(self.measurements)
        y = tuple(float(v) for v in self.y)
        if not measurements:
            raise ValueError("A problem needs at least one measurement")
        if len(y) != len(measurements):
            raise ValueError(f"Got {len(measurements)} measurements but {len(y)} data values")
        if any(not math.isfinite(v) for v in y):
            raise ValueError("Data values must be finite")
        for m in measurements:
            if m.order != order:
                raise OrderMismatchError(f"Measurement {m} has order {m.order}, problem has order {order}")
        lam = float(self.lam)
        if not math.isfinite(lam) or lam < 0:
            raise ValueError(f"lambda must be finite and nonnegative, got {lam}")
        self.loss.weight_vector(len(measurements))
        system = self.system
        if system is None:
            system = FundamentalSystem.default_for(order, [t for m in measurements for t in m.abscissae])
        elif system.order != order:
            raise OrderMismatchError(f"System of order {system.order} does not match problem order {order}")
        grid = None if self.grid is None else tuple(sorted({float(x) for x in self.grid}))
        if grid is not None and any(not math.isfinite(x) for x in grid):
            raise ValueError("Grid positions must be finite")
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "measurements", measurements)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "system", system)
        object.__setattr__(self, "grid", grid)

    @property
    def size(self) -> int:
        return len(self.measurements)

    @property
    def abscissae(self) -> Tuple[float, ...]:
        return tuple(sorted({t for m in self.measurements for t in m.abscissae}))

    @property
    def is_top_order(self) -> bool:
        return all(m.is_top_order for m in self.measurements)

    def with_lambda(self, lam: float) -> "Problem":
        return replace(self, lam=lam)


@dataclass(frozen=True)
class CandidateKnot:
    """Representative knot position of an activation class."""

    position: float
    activation: Tuple[float, ...]
    cell: Interval


@dataclass(frozen=True)
class Report:
    """Well-posedness and solver diagnostics attached to every solution."""

    lambda_ok: bool = True
    loss_ok: bool = True
    infeasible: bool = False
    invisible_null_directions: Tuple[int, ...] = ()
    conflicts: Tuple[str, ...] = ()
    warnings: Tuple[str, ...] = ()
    mode: str = MODE_EXACT
    converged: bool = True
    iterations: int = 0
    seed: Optional[int] = None
    overridden: bool = False

    @property
    def passed(self) -> bool:
        return self.lambda_ok and self.loss_ok and not self.infeasible

    @property
    def status(self) -> str:
        if self.infeasible:
            return "infeasible"
        if not self.passed:
            return "ill-posed"
        return "ok"

    @property
    def free_null_directions(self) -> Tuple[int, ...]:
        return self.invisible_null_directions

    def with_warning(self, message: str) -> "Report":
        return replace(self, warnings=self.warnings + (message,))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "status": self.status,
            "lambda_ok": self.lambda_ok,
            "loss_ok": self.loss_ok,
            "infeasible": self.infeasible,
            "invisible_null_directions": list(self.invisible_null_directions),
            "conflicts": list(self.conflicts),
            "warnings": list(self.warnings),
            "mode": self.mode,
            "converged": self.converged,
            "iterations": self.iterations,
            "seed": self.seed,
            "overridden": self.overridden,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Report":
        return cls(lambda_ok=bool(data.get("lambda_ok", True)),
                   loss_ok=bool(data.get("loss_ok", True)),
                   infeasible=bool(data.get("infeasible", False)),
                   invisible_null_directions=tuple(int(j) for j in data.get("invisible_null_directions", ())),
                   conflicts=tuple(data.get("conflicts", ())),
                   warnings=tuple(data.get("warnings", ())),
                   mode=str(data.get("mode", MODE_EXACT)),
                   converged=bool(data.get("converged", True)),
                   iterations=int(data.get("iterations", 0)),
                   seed=data.get("seed"),
                   overridden=bool(data.get("overridden", False)))


@dataclass(frozen=True)
class Solution:
    """Solver output: spline, cost, knot count, residuals nu(f) - y and diagnostics."""

    spline: PolySpline
    cost: float
    knot_count: int
    residuals: Tuple[float, ...]
    report: Report

    def __post_init__(self) -> None:
        if self.knot_count != self.spline.knot_count:
            raise ValueError(f"knot_count {self.knot_count} disagrees with spline ({self.spline.knot_count} knots)")
        object.__setattr__(self, "residuals", tuple(float(r) for r in self.residuals))
        object.__setattr__(self, "cost", float(self.cost))


def activation(m: Measurement, tau: float) -> float:
    """Response of the measurement to a unit knot u_N(. - tau)."""
    order = m.order
    return math.fsum(c * greens(order - f.d, f.t - tau, f.side) for c, f in m.terms)


def activation_matrix(problem: Problem, positions: Sequence[float]) -> np.ndarray:
    """M x K matrix of knot responses, vectorized over positions."""
    taus = np.asarray(positions, dtype=float)
    matrix = np.zeros((problem.size, taus.size))
    for row, m in enumerate(problem.measurements):
        for c, f in m.terms:
            x = f.t - taus
            degree = problem.order - f.d - 1
            if degree == 0:
                at_zero = 1.0 if f.side is Side.PLUS else 0.0
                values = np.where(x > 0, 1.0, np.where(x < 0, 0.0, at_zero))
            else:
                values = np.where(x > 0, np.maximum(x, 0.0) ** degree / math.factorial(degree), 0.0)
            matrix[row] += c * values
    return matrix


def null_matrix(problem: Problem) -> np.ndarray:
    """M x N matrix [nu_m(p_j)] in the basis of the problem's fundamental system."""
    system = problem.system
    matrix = np.zeros((problem.size, problem.order))
    for row, m in enumerate(problem.measurements):
        for j in range(problem.order):
            matrix[row, j] = math.fsum(c * system.basis_derivative(j, f.t, f.d) for c, f in m.terms)
    return matrix


def _cells(abscissae: Sequence[float]) -> List[Tuple[Interval, float, bool]]:
    """Elementary cells (open gaps and abscissa singletons) with a sample point each."""
    xs = list(abscissae)
    cells = [(Interval(-math.inf, xs[0], False, False), xs[0] - 1.0, False)]
    for i, x in enumerate(xs):
        cells.append((Interval(x, x, True, True), x, True))
        if i + 1 < len(xs):
            cells.append((Interval(x, xs[i + 1], False, False), 0.5 * (x + xs[i + 1]), False))
    cells.append((Interval(xs[-1], math.inf, False, False), xs[-1] + 1.0, False))
    return cells


def candidate_knots(problem: Problem) -> List[CandidateKnot]:
    """
    Representative knot positions, one per activation class.

    Exact mode (every term has d = N-1): the real line is cut at the measurement
    abscissae, adjacent cells with equal activation are merged, and each class is
    represented by its leftmost abscissa, else the midpoint of its gap, else one
    unit beyond the outermost abscissa. Classes sharing an activation vector are
    deduplicated, preferring an abscissa representative. Approximate mode uses the
    problem's grid.

    Args:
        problem (Problem): The problem.

    Returns:
        List[CandidateKnot]: Candidates sorted by position.

    Raises:
        ValueError: If the measurement set is empty, or a mixed-order problem has no grid.
    """
    if not problem.measurements:
        raise ValueError("Cannot build candidate knots for an empty measurement set")
    if not problem.is_top_order:
        if problem.grid is None:
            raise ValueError("Mixed-order problems are solved in grid mode and need a knot grid")
        columns = activation_matrix(problem, problem.grid)
        return [CandidateKnot(x, tuple(float(v) for v in columns[:, k]), Interval(x, x))
                for k, x in enumerate(problem.grid)]

    classes: List[Dict[str, Any]] = []
    for cell, sample, is_abscissa in _cells(problem.abscissae):
        pattern = tuple(activation(m, sample) for m in problem.measurements)
        if classes and classes[-1]["activation"] == pattern:
            current = classes[-1]
            current["cells"].append(cell)
            if is_abscissa and current["abscissa"] is None:
                current["abscissa"] = sample
        else:
            classes.append({"activation": pattern, "cells": [cell], "sample": sample,
                            "abscissa": sample if is_abscissa else None})

    chosen: Dict[Tuple[float, ...], CandidateKnot] = {}
    for item in classes:
        first, last = item["cells"][0], item["cells"][-1]
        span = Interval(first.left, last.right, first.left_closed, last.right_closed)
        position = item["abscissa"] if item["abscissa"] is not None else item["sample"]
        candidate = CandidateKnot(position, item["activation"], span)
        previous = chosen.get(item["activation"])
        if previous is None or (item["abscissa"] is not None and not _is_abscissa(previous, problem)):
            chosen[item["activation"]] = candidate
    candidates = sorted(chosen.values(), key=lambda c: c.position)
    logger.debug(f"{len(classes)} activation classes reduced to {len(candidates)} candidates")
    return candidates


def _is_abscissa(candidate: CandidateKnot, problem: Problem) -> bool:
    return candidate.position in problem.abscissae


def reduce_to_first_order(problem: Problem) -> Problem:
    """
    Order-1 counterpart of an all-top-order problem.

    Every term D^{N-1} delta_t^+- becomes delta_t^+-; the system keeps its interval.

    Raises:
        ValueError: If some term has d < N-1.
    """
    if not problem.is_top_order:
        raise ValueError("Only problems whose terms all have d = N-1 reduce to first order")
    measurements = tuple(Measurement.combination(1, [(c, f.t, f.side, 0) for c, f in m.terms])
                         for m in problem.measurements)
    system = FundamentalSystem(1, problem.system.interval)
    return replace(problem, order=1, measurements=measurements, system=system)


def check_wellposedness(problem: Problem) -> Report:
    """
    Operational well-posedness checklist.

    Checks (a) lambda > 0 for the penalized loss, (b) convexity/coercivity of the
    loss in the residual, (c) which null directions p_j every measurement
    annihilates (recorded as warnings), and (d) duplicated measurements carrying
    contradictory interpolation data (flagged infeasible).

    Args:
        problem (Problem): The problem.

    Returns:
        Report: The diagnostics; never raises.
    """
    penalized = problem.loss.kind is LossKind.SQUARED
    lambda_ok = not penalized or problem.lam > 0
    warnings: List[str] = []
    if not lambda_ok:
        warnings.append(f"lambda = {problem.lam} must be positive for the penalized loss")

    H = null_matrix(problem)
    scale = max(1.0, float(np.abs(H).max()) if H.size else 1.0)
    invisible = tuple(j for j in range(problem.order) if np.all(np.abs(H[:, j]) <= 1e-13 * scale))
    for j in invisible:
        warnings.append(f"null direction p_{j} is invisible to every measurement; the solution set is unbounded along it")

    conflicts: List[str] = []
    if problem.loss.kind is LossKind.INTERPOLATION:
        seen: Dict[Tuple[Any, ...], float] = {}
        for m, value in zip(problem.measurements, problem.y):
            key = m.key()
            if key in seen and seen[key] != value:
                conflicts.append(f"measurement {m} is required to equal both {seen[key]} and {value}")
            seen.setdefault(key, value)

    mode = MODE_EXACT if problem.is_top_order else MODE_GRID
    if mode == MODE_GRID:
        warnings.append("mixed-order measurements: solved on the supplied grid only")
    report = Report(lambda_ok=lambda_ok,
                    loss_ok=True,
                    infeasible=bool(conflicts),
                    invisible_null_directions=invisible,
                    conflicts=tuple(conflicts),
                    warnings=tuple(warnings),
                    mode=mode)
    for message in warnings + conflicts:
        logger.warning(message)
    return report


def soft_threshold(x: np.ndarray, threshold: float) -> np.ndarray:
    return np.sign(x) * np.maximum(np.abs(x) - threshold, 0.0)


def _complement_projector(H: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto the complement of range(H)."""
    rows = H.shape[0]
    if H.shape[1] == 0:
        return np.eye(rows)
    U, s, _ = np.linalg.svd(H, full_matrices=False)
    rank = int(np.sum(s > 1e-12 * max(1.0, s.max())))
    Q = U[:, :rank]
    return np.eye(rows) - Q @ Q.T


def _lasso_objective(B: np.ndarray, z: np.ndarray, lam: float, a: np.ndarray) -> float:
    r = B @ a - z
    return float(r @ r + lam * np.abs(a).sum())


def _polish(B: np.ndarray, z: np.ndarray, lam: float, a: np.ndarray, tol: float) -> Optional[np.ndarray]:
    """Solve the KKT system on the support and sign pattern of `a`; None if it does not certify."""
    support = np.flatnonzero(a)
    signs = np.sign(a[support])
    polished = np.zeros_like(a)
    if support.size:
        Bs = B[:, support]
        rhs = Bs.T @ z - 0.5 * lam * signs
        values = np.linalg.lstsq(Bs.T @ Bs, rhs, rcond=None)[0]
        if np.any(np.sign(values) != signs):
            return None
        polished[support] = values
    gradient = 2.0 * B.T @ (z - B @ polished)
    slack = tol * max(1.0, lam) + 1e-9 * lam
    if support.size and np.max(np.abs(gradient[support] - lam * signs)) > max(slack, 1e-9):
        return None
    off = np.setdiff1d(np.arange(a.size), support)
    if off.size and np.max(np.abs(gradient[off])) > lam + max(slack, 1e-9):
        return None
    return polished


def solve_lasso(B: np.ndarray, z: np.ndarray, lam: float, tol: float, max_iter: int) -> Tuple[np.ndarray, int, bool]:
    """
    min_a ||B a - z||^2 + lam ||a||_1 by accelerated proximal gradient with backtracking.

    The step starts from the largest row norm of B and is halved until the
    quadratic upper bound holds. Every few iterations the current support is
    polished by solving its KKT system; a certified polish ends the run.

    Returns:
        Tuple[np.ndarray, int, bool]: Weights, iterations used and whether optimality was certified.
    """
    K = B.shape[1]
    a = np.zeros(K)
    if K == 0:
        return a, 0, True
    lipschitz = max(2.0 * float(np.max(np.sum(B * B, axis=1))), 1e-300)
    ceiling = 2.0 * float(np.sum(B * B)) + 1e-300
    kkt_tol = 1e-9 * max(1.0, lam, float(np.abs(B.T @ z).max()))
    momentum_point, t = a.copy(), 1.0

    def smooth(x: np.ndarray) -> float:
        r = B @ x - z
        return float(r @ r)

    for iteration in range(1, max_iter + 1):
        gradient = 2.0 * B.T @ (B @ momentum_point - z)
        base = smooth(momentum_point)
        while True:
            candidate = soft_threshold(momentum_point - gradient / lipschitz, lam / lipschitz)
            step = candidate - momentum_point
            bound = base + gradient @ step + 0.5 * lipschitz * (step @ step)
            if smooth(candidate) <= bound + 1e-15 * max(1.0, abs(base)) or lipschitz >= ceiling:
                break
            lipschitz = min(2.0 * lipschitz, ceiling)
        fixed_point_residual = lipschitz * float(np.linalg.norm(step))
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        momentum_point = candidate + ((t - 1.0) / t_next) * (candidate - a)
        if _lasso_objective(B, z, lam, candidate) > _lasso_objective(B, z, lam, a):
            momentum_point = candidate.copy()
            t_next = 1.0
        a, t = candidate, t_next
        if iteration % 25 == 0 or fixed_point_residual <= tol:
            polished = _polish(B, z, lam, a, tol)
            if polished is not None and _lasso_objective(B, z, lam, polished) <= _lasso_objective(B, z, lam, a) + 1e-12:
                logger.debug(f"proximal gradient certified after {iteration} iterations")
                return polished, iteration, True
            if fixed_point_residual <= tol or _kkt_violation(B, z, lam, a) <= kkt_tol:
                return a, iteration, True
    return a, max_iter, False


def _kkt_violation(B: np.ndarray, z: np.ndarray, lam: float, a: np.ndarray) -> float:
    """Largest violation of the lasso optimality conditions at `a`."""
    gradient = 2.0 * B.T @ (z - B @ a)
    support = a != 0
    on = np.abs(gradient[support] - lam * np.sign(a[support]))
    off = np.maximum(np.abs(gradient[~support]) - lam, 0.0)
    return float(max(on.max(initial=0.0), off.max(initial=0.0)))


def solve_basis_pursuit(H: np.ndarray, A: np.ndarray, target: np.ndarray, tol: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    min ||a||_1 subject to H c + A a = target, as a linear program with a = a_plus - a_minus.

    The dual simplex returns a vertex, so at most rank([H A]) weights are nonzero.
    The support is then re-solved exactly by least squares.

    Returns:
        Tuple[np.ndarray, np.ndarray]: Null coefficients c and knot weights a.

    Raises:
        InfeasibleProblemError: If the constraints cannot be met.
        ConvergenceError: If the LP solver fails for another reason.
    """
    rows, n_null = H.shape
    K = A.shape[1]
    cost = np.concatenate([np.zeros(n_null), np.ones(2 * K)])
    equality = np.hstack([H, A, -A]) if K else H
    bounds = [(None, None)] * n_null + [(0, None)] * (2 * K)
    result = linprog(cost, A_eq=equality, b_eq=target, bounds=bounds, method="highs-ds")
    if result.status == 2:
        raise InfeasibleProblemError("interpolation constraints are infeasible")
    if not result.success:
        raise ConvergenceError(f"linear program failed: {result.message}")
    c = np.asarray(result.x[:n_null], dtype=float)
    a = np.asarray(result.x[n_null:n_null + K] - result.x[n_null + K:], dtype=float)
    a[np.abs(a) <= tol] = 0.0
    support = np.flatnonzero(a)
    system = np.hstack([H, A[:, support]])
    if system.shape[1]:
        refined = np.linalg.lstsq(system, target, rcond=None)[0]
        residual = np.linalg.norm(system @ refined - target)
        refined_a = refined[n_null:]
        if residual <= 1e-9 * max(1.0, float(np.linalg.norm(target))) and np.all(np.sign(refined_a) == np.sign(a[support])):
            c = refined[:n_null]
            a[support] = refined_a
    scale = max(1.0, float(np.linalg.norm(target)))
    if np.linalg.norm(H @ c + A @ a - target) > 1e-7 * scale:
        raise InfeasibleProblemError("interpolation constraints are infeasible")
    return c, a


@dataclass(frozen=True)
class Design:
    """Finite-dimensional reduction of a problem."""

    positions: np.ndarray
    A: np.ndarray
    H: np.ndarray
    visible: Tuple[int, ...]


def build_design(problem: Problem, positions: Sequence[float], columns: Optional[np.ndarray] = None) -> Design:
    """Drop zero and duplicate knot columns and invisible null columns."""
    positions = np.asarray(positions, dtype=float)
    A = activation_matrix(problem, positions) if columns is None else columns
    keep: List[int] = []
    seen = set()
    for k in range(A.shape[1]):
        column = A[:, k]
        if not np.any(column):
            continue
        signature = column.tobytes()
        if signature in seen:
            continue
        seen.add(signature)
        keep.append(k)
    H_full = null_matrix(problem)
    scale = max(1.0, float(np.abs(H_full).max()) if H_full.size else 1.0)
    visible = tuple(j for j in range(problem.order) if np.any(np.abs(H_full[:, j]) > 1e-13 * scale))
    return Design(positions=positions[keep], A=A[:, keep], H=H_full[:, list(visible)], visible=visible)


def assemble_spline(problem: Problem, design: Design, null_visible: np.ndarray, weights: np.ndarray,
                    tol: float) -> PolySpline:
    """Spline from visible jet coefficients and knot weights; weights below tol are pruned."""
    jet = [0.0] * problem.order
    for value, j in zip(null_visible, design.visible):
        jet[j] = float(value)
    polynomial = problem.system.polynomial_from_jet(jet)
    knots = [(float(x), float(w)) for x, w in zip(design.positions, weights) if abs(w) > tol]
    return PolySpline.build(problem.order, polynomial.null_coeffs, knots)


def objective(problem: Problem, spline: PolySpline) -> Tuple[float, Tuple[float, ...]]:
    """
    Re-evaluate E(nu(f), y) + lambda ||D^N f||_M on a spline.

    For the interpolation loss the cost is the total variation alone.

    Returns:
        Tuple[float, Tuple[float, ...]]: Cost and residuals nu(f) - y.
    """
    values = apply_all(problem.measurements, spline)
    residuals = tuple(v - y for v, y in zip(values, problem.y))
    tv = tv_norm(derivative_measure(spline))
    if problem.loss.kind is LossKind.INTERPOLATION:
        return tv, residuals
    return problem.loss.evaluate(residuals) + problem.lam * tv, residuals


def fit_design(problem: Problem, design: Design, opts: SolveOptions,
               lasso=solve_lasso) -> Tuple[PolySpline, int, bool]:
    """Solve the reduced problem on a design; returns the spline, iterations and convergence flag."""
    y = np.asarray(problem.y, dtype=float)
    if problem.loss.kind is LossKind.INTERPOLATION:
        c, a = solve_basis_pursuit(design.H, design.A, y, opts.tol)
        return assemble_spline(problem, design, c, a, opts.tol), 0, True

    root_w = np.sqrt(problem.loss.weight_vector(problem.size))
    Hw, Aw, yw = design.H * root_w[:, None], design.A * root_w[:, None], y * root_w
    projector = _complement_projector(Hw)
    B, z = projector @ Aw, projector @ yw
    active = np.flatnonzero(np.linalg.norm(B, axis=0) > 1e-12 * max(1.0, float(np.abs(Aw).max(initial=0.0))))
    a = np.zeros(design.A.shape[1])
    weights, iterations, converged = lasso(B[:, active], z, problem.lam, opts.tol, opts.max_iter)
    a[active] = weights
    a[np.abs(a) <= opts.tol] = 0.0
    if Hw.shape[1]:
        c = np.linalg.lstsq(Hw, yw - Aw @ a, rcond=None)[0]
    else:
        c = np.zeros(0)
    return assemble_spline(problem, design, c, a, opts.tol), iterations, converged


def vet_problem(problem: Problem, opts: SolveOptions) -> Report:
    report = check_wellposedness(problem)
    if report.infeasible:
        logger.debug(f"Problem is infeasible: {'; '.join(report.conflicts)}")
        raise InfeasibleProblemError("; ".join(report.conflicts))
    if not report.passed:
        if not opts.allow_ill_posed:
            logger.debug("Problem failed its well-posedness check")
            raise WellPosednessError("problem failed its well-posedness check", report)
        report = replace(report, overridden=True).with_warning("well-posedness check overridden")
    return report


def solve(problem: Problem, opts: Optional[SolveOptions] = None) -> Solution:
    """
    Solve the problem over D^N-splines with knots drawn from candidate_knots.

    Squared loss: accelerated proximal gradient on the lasso left after the
    unpenalized null coefficients are eliminated. Interpolation: minimum total
    variation by linear programming.

    Args:
        problem (Problem): The problem.
        opts (Optional[SolveOptions]): Tolerance, iteration cap, seed, override flag.

    Returns:
        Solution: Spline, re-evaluated cost, knot count, residuals and report.

    Raises:
        InfeasibleProblemError: If interpolation constraints conflict.
        WellPosednessError: If the check fails and is not overridden.
        ConvergenceError: If the iteration cap is hit without a certified optimum.
    """
    opts = opts or SolveOptions()
    report = vet_problem(problem, opts)
    candidates = candidate_knots(problem)
    design = build_design(problem, [c.position for c in candidates])
    logger.debug(f"solving with {design.A.shape[1]} knot columns and {len(design.visible)} visible null directions")
    spline, iterations, converged = fit_design(problem, design, opts)
    if not converged:
        logger.debug(f"Proximal gradient did not converge within {opts.max_iter} iterations")
        raise ConvergenceError(f"no certified optimum within {opts.max_iter} iterations")
    cost, residuals = objective(problem, spline)
    report = replace(report, iterations=iterations, converged=converged, seed=opts.seed)
    logger.info(f"Solved {report.mode} problem: cost {cost:.12g} with {spline.knot_count} knots")
    return Solution(spline, cost, spline.knot_count, residuals, report)


def solve_path(problem: Problem,
               lambdas: Sequence[float],
               opts: Optional[SolveOptions] = None,
               workers: int = 4) -> List[Solution]:
    """
    Solve the problem for several regularization weights.

    The solves are independent and run on a thread pool; results come back in input order.
    """
    problems = [problem.with_lambda(lam) for lam in lambdas]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        return list(executor.map(lambda p: solve(p, opts), problems))
