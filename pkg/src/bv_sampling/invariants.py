"""Property-based invariant suite behind the `check` command.

Each invariant pairs a hypothesis strategy with a checker that returns an error
message or None. Runs are seeded and use no example database, so a given seed
always explores the same cases; on failure hypothesis shrinks the case and the
minimized one is reported.
"""
import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Any, Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from hypothesis import HealthCheck, Phase, Verbosity, given, settings
from hypothesis import seed as hypothesis_seed
from hypothesis import strategies as st

from .config import SolveOptions
from .documents import (ProblemDocument, SolutionDocument, dumps_problem, dumps_solution, parse_problem,
                        parse_solution)
from .extreme_points import enumerate_extreme_points
from .gbv_core import PolySpline, derivative_measure, eval_trace, gbv_norm, generalized_trace
from .measures import (Interval, PiecewiseLinearTestFunction, Side, SignedMeasure, cumulative, pair_continuous,
                       restrict, tv_norm)
from .oracle import oracle_solve
from .sampling import (Measurement, SamplingFunctional, apply, apply_all, continuity_bound,
                       weakstar_counterexample)
from .solver import Loss, Problem, Report, Solution, objective, reduce_to_first_order, solve
from .systems import FundamentalSystem, kernel, project_null, right_inverse

logger = logging.getLogger(__name__)

# Abscissae are drawn from this lattice so every activation class contains an open interval.
LATTICE = tuple(-1.0 + 0.25 * k for k in range(13))
COEFFICIENTS = (1.0, -1.0, 0.5, 2.0)
ORACLE_GRID_STEP = 1e-3
TRACE_POINTS = 100


class InvariantViolation(AssertionError):
    """Raised inside a hypothesis run when a checker reports a failure."""


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    cases: int
    failure: Optional[str] = None


@dataclass(frozen=True)
class Invariant:
    """A named property: case strategy and checker returning an error message or None."""

    name: str
    strategy: st.SearchStrategy
    check: Callable[[Any, SolveOptions], Optional[str]]
    max_cases: Optional[int] = None


def reals(low: float, high: float, **kwargs: Any) -> st.SearchStrategy:
    """Finite, normal floats in [low, high]."""
    return st.floats(low, high, allow_nan=False, allow_infinity=False, allow_subnormal=False, **kwargs)


def dyadic(low: int, high: int) -> st.SearchStrategy:
    """Multiples of 1/8 between low/8 and high/8; sums and differences of these are exact."""
    return st.integers(low, high).map(lambda k: k / 8.0)


sides = st.sampled_from(list(Side))
weights = st.builds(lambda size, sign: size * sign, reals(0.1, 2.0), st.sampled_from((-1.0, 1.0)))


@st.composite
def systems(draw: Callable, orders: st.SearchStrategy = st.integers(1, 4)) -> FundamentalSystem:
    return FundamentalSystem.on(draw(orders), draw(reals(-2.0, 0.0)))


@st.composite
def atomic_measures(draw: Callable, left: float, right: float, min_atoms: int = 0,
                    max_atoms: int = 6) -> SignedMeasure:
    atoms = draw(st.lists(st.tuples(reals(left, right), weights), min_size=min_atoms, max_size=max_atoms))
    return SignedMeasure.build(atoms)


@st.composite
def measures(draw: Callable) -> SignedMeasure:
    """Atoms and density pieces inside [-3, 3]."""
    atoms = draw(st.lists(st.tuples(reals(-3.0, 3.0), reals(-2.0, 2.0)), max_size=5))
    pieces = draw(st.lists(st.tuples(reals(-3.0, 2.0), reals(0.1, 1.0), reals(-2.0, 2.0)), max_size=3))
    return SignedMeasure.build(atoms, [(l, l + width, v) for l, width, v in pieces])


@st.composite
def piecewise_linear_functions(draw: Callable) -> PiecewiseLinearTestFunction:
    breakpoints = sorted(draw(st.lists(reals(-3.0, 3.0), min_size=2, max_size=6, unique=True)))
    inner = draw(st.lists(reals(-2.0, 2.0), min_size=len(breakpoints) - 2, max_size=len(breakpoints) - 2))
    return PiecewiseLinearTestFunction(tuple(breakpoints), (0.0, *inner, 0.0))


@st.composite
def splines(draw: Callable, order: int, left: float, right: float, max_knots: int = 5) -> PolySpline:
    coeffs = draw(st.lists(reals(-2.0, 2.0), min_size=order, max_size=order))
    knots = draw(st.lists(st.tuples(reals(left, right), weights), max_size=max_knots))
    return PolySpline.build(order, coeffs, knots)


@st.composite
def top_order_problems(draw: Callable,
                       orders: st.SearchStrategy = st.integers(1, 3),
                       sizes: st.SearchStrategy = st.integers(1, 4),
                       loss: Optional[Loss] = None,
                       single_terms: bool = False) -> Problem:
    """
    Problems whose terms all have d = N-1, with distinct abscissae drawn from LATTICE.

    Args:
        draw (Callable): Hypothesis draw function.
        orders (SearchStrategy): Strategy for the order N.
        sizes (SearchStrategy): Strategy for the number of measurements M (at most 6).
        loss (Optional[Loss]): Loss; unweighted squares by default.
        single_terms (bool): Whether every measurement is a single unit trace.

    Returns:
        Problem: The problem, with lambda drawn from [0.01, 1].
    """
    order, size = draw(orders), draw(sizes)
    term_counts = [1 if single_terms else draw(st.integers(1, 2)) for _ in range(size)]
    points = list(draw(st.permutations(LATTICE)))
    measurements = []
    for count in term_counts:
        terms = []
        for _ in range(count):
            c = 1.0 if single_terms else draw(st.sampled_from(COEFFICIENTS))
            terms.append((c, points.pop(), draw(sides), order - 1))
        measurements.append(Measurement.combination(order, terms))
    y = draw(st.lists(reals(-3.0, 3.0).map(lambda v: round(v, 6)), min_size=size, max_size=size))
    return Problem(order=order,
                   measurements=tuple(measurements),
                   y=tuple(y),
                   loss=loss or Loss.squared(),
                   lam=draw(reals(0.01, 1.0)))


def tightness_witness(functional: SamplingFunctional, system: FundamentalSystem) -> PolySpline:
    """
    Spline on which a unit top-order trace attains its continuity bound.

    Right of the anchor a single knot between a and t does it: its trace is 1 and
    its jet vanishes. At or left of the anchor the top basis polynomial p_{N-1} is used.

    Raises:
        ValueError: If the functional is not a top-order trace.
    """
    if not functional.is_top_order:
        raise ValueError(f"Tightness witnesses exist for top-order traces only, got {functional}")
    t, anchor = functional.t, system.anchor
    if t > anchor:
        tau = anchor + 0.5 * (t - anchor) if functional.side is Side.MINUS else t
        return PolySpline.green(system.order, tau)
    return system.basis_spline(system.order - 1)


def _close(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol


# Measures

class MeasurePair(NamedTuple):
    mu: SignedMeasure
    nu: SignedMeasure


def _check_tv_triangle(case: MeasurePair, opts: SolveOptions) -> Optional[str]:
    left, right = tv_norm(case.mu + case.nu), tv_norm(case.mu) + tv_norm(case.nu)
    if left > right * (1.0 + 1e-12) + 1e-12:
        return f"||mu + nu|| = {left} exceeds ||mu|| + ||nu|| = {right}"
    return None


class CumulativeCase(NamedTuple):
    mu: SignedMeasure
    points: Tuple[float, ...]


@st.composite
def _cumulative_cases(draw: Callable) -> CumulativeCase:
    return CumulativeCase(draw(measures()), tuple(draw(st.lists(reals(-4.0, 4.0), min_size=1, max_size=TRACE_POINTS))))


def _check_cumulative_jumps(case: CumulativeCase, opts: SolveOptions) -> Optional[str]:
    scale = max(1.0, tv_norm(case.mu))
    for t in [x for x, _ in case.mu.atoms] + list(case.points):
        jump = cumulative(case.mu, t, Side.PLUS) - cumulative(case.mu, t, Side.MINUS)
        if not _close(jump, case.mu.weight_at(t), 1e-12 * scale):
            return f"cumulative jump at {t} is {jump}, atom weight is {case.mu.weight_at(t)}"
    return None


class PairingCase(NamedTuple):
    g: PiecewiseLinearTestFunction
    mu: SignedMeasure


def _check_pairing_bound(case: PairingCase, opts: SolveOptions) -> Optional[str]:
    value = abs(pair_continuous(case.g, case.mu))
    bound = case.g.sup_norm() * tv_norm(case.mu)
    if value > bound * (1.0 + 1e-12) + 1e-15:
        return f"|<g, mu>| = {value} exceeds sup|g| ||mu|| = {bound}"
    return None


def _check_restrict_to_line(mu: SignedMeasure, opts: SolveOptions) -> Optional[str]:
    restricted = restrict(mu, Interval.real_line())
    return None if restricted == mu else f"restriction to the real line changed {mu} into {restricted}"


# Splines

class SplinePair(NamedTuple):
    system: FundamentalSystem
    f: PolySpline
    h: PolySpline
    scale: float


@st.composite
def _spline_pairs(draw: Callable) -> SplinePair:
    system = draw(systems())
    a = system.anchor
    return SplinePair(system,
                      draw(splines(system.order, a - 1.0, a + 3.0)),
                      draw(splines(system.order, a - 1.0, a + 3.0)),
                      draw(reals(-3.0, 3.0)))


def _check_norm_definiteness(case: SplinePair, opts: SolveOptions) -> Optional[str]:
    for f in (case.f, PolySpline.zero(case.f.order)):
        norm = gbv_norm(f, case.system)
        if (norm == 0.0) != f.is_zero:
            return f"||f||_GBV = {norm} for f = {f}"
    return None


def _check_norm_axioms(case: SplinePair, opts: SolveOptions) -> Optional[str]:
    nf, nh = gbv_norm(case.f, case.system), gbv_norm(case.h, case.system)
    total = gbv_norm(case.f + case.h, case.system)
    if total > (nf + nh) * (1.0 + 1e-12) + 1e-12:
        return f"||f + h|| = {total} exceeds ||f|| + ||h|| = {nf + nh}"
    scaled = gbv_norm(case.scale * case.f, case.system)
    if not _close(scaled, abs(case.scale) * nf, 1e-12 * max(1.0, abs(case.scale) * nf)):
        return f"||{case.scale} f|| = {scaled}, expected {abs(case.scale) * nf}"
    return None


class TracePoints(NamedTuple):
    f: PolySpline
    points: Tuple[Tuple[float, Side], ...]


@st.composite
def _trace_points(draw: Callable) -> TracePoints:
    f = draw(splines(draw(st.integers(1, 4)), -2.0, 2.0))
    points = draw(st.lists(st.tuples(st.one_of(st.sampled_from([x for x, _ in f.knots] or [0.0]), reals(-3.0, 3.0)),
                                     sides), min_size=1, max_size=20))
    return TracePoints(f, tuple(points))


def _check_order_zero_trace(case: TracePoints, opts: SolveOptions) -> Optional[str]:
    for t, side in case.points:
        if generalized_trace(case.f, t, side, 0) != eval_trace(case.f, t, side):
            return f"order-0 generalized trace differs from eval_trace at {t}{side.value}"
    return None


@st.composite
def _jump_splines(draw: Callable) -> PolySpline:
    order = draw(st.sampled_from((1, 1, 2, 3)))
    return draw(splines(order, -2.0, 2.0).filter(lambda f: f.knots))


def _check_side_conventions(f: PolySpline, opts: SolveOptions) -> Optional[str]:
    step = PolySpline.green(1, 0.0)
    if eval_trace(step, 0.0, Side.PLUS) != 1.0 or eval_trace(step, 0.0, Side.MINUS) != 0.0:
        return "unit step must have right trace 1 and left trace 0 at its knot"
    top = f.order - 1
    measure = derivative_measure(f)
    for x, w in f.knots:
        jump = generalized_trace(f, x, Side.PLUS, top) - generalized_trace(f, x, Side.MINUS, top)
        if not _close(jump, w, 1e-12 * max(1.0, abs(w))):
            return f"D^{top} jump at knot {x} is {jump}, knot weight is {w}"
        mass = cumulative(measure, x, Side.PLUS) - cumulative(measure, x, Side.MINUS)
        if not _close(mass, w, 1e-12 * max(1.0, tv_norm(measure))):
            return f"cumulative jump at {x} is {mass}, knot weight is {w}"
    return None


# Fundamental systems and the right inverse

class MeasureCase(NamedTuple):
    system: FundamentalSystem
    mu: SignedMeasure


@st.composite
def _measure_cases(draw: Callable) -> MeasureCase:
    system = draw(systems())
    a = system.anchor
    return MeasureCase(system, draw(atomic_measures(a, a + 4.0, min_atoms=1)))


def _check_right_inverse(case: MeasureCase, opts: SolveOptions) -> Optional[str]:
    g = right_inverse(case.mu, case.system)
    recovered = derivative_measure(g)
    if [x for x, _ in recovered.atoms] != [x for x, _ in case.mu.atoms]:
        return f"atom locations {recovered.atoms} differ from {case.mu.atoms}"
    for (x, w), (_, v) in zip(case.mu.atoms, recovered.atoms):
        if not _close(w, v, 1e-12):
            return f"weight at {x} is {v}, expected {w}"
    scale = max(1.0, tv_norm(case.mu))
    for j in range(case.system.order):
        value = generalized_trace(g, case.system.anchor, Side.PLUS, j)
        if abs(value) > 1e-12 * scale:
            return f"<phi_{j}, R mu> = {value}, expected 0"
    return None


class DecompositionCase(NamedTuple):
    system: FundamentalSystem
    f: PolySpline
    points: Tuple[Tuple[float, Side, int], ...]


@st.composite
def _decomposition_cases(draw: Callable) -> DecompositionCase:
    system = draw(systems(st.integers(1, 3)))
    order, a = system.order, system.anchor
    f = draw(splines(order, a, a + 4.0))
    points = draw(st.lists(st.tuples(reals(a, a + 5.0), sides, st.integers(0, order - 1)),
                           min_size=TRACE_POINTS, max_size=TRACE_POINTS))
    return DecompositionCase(system, f, tuple(points))


def _check_decomposition(case: DecompositionCase, opts: SolveOptions) -> Optional[str]:
    rebuilt = right_inverse(derivative_measure(case.f), case.system) + project_null(case.f, case.system)
    for t, side, d in case.points:
        expected = generalized_trace(case.f, t, side, d)
        got = generalized_trace(rebuilt, t, side, d)
        if not _close(expected, got, 1e-10):
            return f"D^{d} trace at {t}{side.value}: {got} != {expected}"
    return None


class ProjectionCase(NamedTuple):
    system: FundamentalSystem
    f: PolySpline


@st.composite
def _projection_cases(draw: Callable) -> ProjectionCase:
    system = draw(systems())
    a = system.anchor
    return ProjectionCase(system, draw(splines(system.order, a - 1.0, a + 4.0)))


def _check_projection_idempotent(case: ProjectionCase, opts: SolveOptions) -> Optional[str]:
    once = project_null(case.f, case.system)
    twice = project_null(once, case.system)
    if once.knots or twice.knots:
        return f"projection {once} is not a polynomial"
    scale = max([1.0] + [abs(b) for b in once.null_coeffs])
    for b1, b2 in zip(once.null_coeffs, twice.null_coeffs):
        if not _close(b1, b2, 1e-12 * scale):
            return f"P P f = {twice.null_coeffs} differs from P f = {once.null_coeffs}"
    return None


def _check_biorthogonality(order: int, opts: SolveOptions) -> Optional[str]:
    matrix = FundamentalSystem.on(order, -1.0).biorthogonality_matrix()
    identity = [[1.0 if i == j else 0.0 for j in range(order)] for i in range(order)]
    return None if matrix == identity else f"<phi_i, p_j> = {matrix} for N = {order}"


class CausalityCase(NamedTuple):
    system: FundamentalSystem
    start: float
    mu: SignedMeasure
    points: Tuple[float, ...]


@st.composite
def _causality_cases(draw: Callable) -> CausalityCase:
    system = draw(systems())
    a = system.anchor
    start = a + draw(reals(0.5, 2.0))
    mu = SignedMeasure.build([(start, draw(reals(0.1, 2.0)))]) + draw(atomic_measures(start, start + 3.0, max_atoms=4))
    points = draw(st.lists(reals(a, start, exclude_max=True), min_size=20, max_size=20))
    return CausalityCase(system, start, mu, tuple(points))


def _check_causality(case: CausalityCase, opts: SolveOptions) -> Optional[str]:
    g = right_inverse(case.mu, case.system)
    for t in case.points:
        for side in Side:
            value = eval_trace(g, t, side)
            if abs(value) > 1e-12:
                return f"right inverse of a measure supported in [{case.start}, inf) is {value} at {t}{side.value}"
    return None


class LocalityCase(NamedTuple):
    system: FundamentalSystem
    nested: Interval
    mu: SignedMeasure


@st.composite
def _locality_cases(draw: Callable) -> LocalityCase:
    system = draw(systems())
    left = system.anchor + draw(reals(0.0, 1.0))
    nested = Interval.closed(left, left + draw(reals(1.0, 3.0)))
    return LocalityCase(system, nested, draw(atomic_measures(nested.left, nested.right, min_atoms=1, max_atoms=4)))


def _check_locality(case: LocalityCase, opts: SolveOptions) -> Optional[str]:
    inner = case.system.restrict(case.nested)
    difference = right_inverse(case.mu, case.system) - right_inverse(restrict(case.mu, case.nested), inner)
    if difference.knots:
        return f"localized inverses differ by knots {difference.knots}"
    discrepancy = difference - project_null(difference, case.system)
    for t in np.linspace(case.nested.left, case.nested.right, 7).tolist():
        value = eval_trace(discrepancy, t, Side.PLUS)
        if abs(value) > 1e-10:
            return f"difference of localized inverses is not a null-space polynomial: residual {value} at {t}"
    return None


class ShiftCase(NamedTuple):
    system: FundamentalSystem
    t: float
    tau: float
    h: float
    side: Side


@st.composite
def _shift_cases(draw: Callable) -> ShiftCase:
    system = FundamentalSystem.on(draw(st.integers(1, 4)), draw(dyadic(-16, 0)))
    tau = system.anchor + draw(dyadic(1, 32))
    h = draw(dyadic(-32, 32).filter(lambda s: tau + s > system.anchor))
    return ShiftCase(system, tau + draw(dyadic(-24, 24)), tau, h, draw(sides))


def _check_shift_invariance(case: ShiftCase, opts: SolveOptions) -> Optional[str]:
    base = kernel(case.system, case.t, case.tau, case.side)
    shifted = kernel(case.system, case.t + case.h, case.tau + case.h, case.side)
    if not _close(base, shifted, 1e-12 * max(1.0, abs(base))):
        return f"g({case.t}, {case.tau}) = {base} but g shifted by {case.h} is {shifted}"
    return None


# Sampling functionals

class BoundCase(NamedTuple):
    system: FundamentalSystem
    m: Measurement
    f: PolySpline


@st.composite
def bound_cases(draw: Callable) -> BoundCase:
    """Measurement and spline pairs with abscissae right of the anchor."""
    system = draw(systems(st.integers(1, 3)))
    order, a = system.order, system.anchor
    top = draw(st.booleans())
    terms = draw(st.lists(st.tuples(st.sampled_from(COEFFICIENTS), reals(a, a + 4.0), sides,
                                    st.just(order - 1) if top else st.integers(0, order - 1)),
                          min_size=1, max_size=3))
    return BoundCase(system, Measurement.combination(order, terms), draw(splines(order, a - 1.0, a + 4.0)))


def _check_bound(case: BoundCase, opts: SolveOptions) -> Optional[str]:
    value = abs(apply(case.m, case.f))
    bound = continuity_bound(case.m, case.system) * gbv_norm(case.f, case.system)
    if value > bound * (1.0 + 1e-12) + 1e-12:
        return f"|{case.m}(f)| = {value} exceeds C ||f||_GBV = {bound}"
    return None


class TightnessCase(NamedTuple):
    system: FundamentalSystem
    functional: SamplingFunctional


@st.composite
def _tightness_cases(draw: Callable) -> TightnessCase:
    order = draw(st.integers(1, 4))
    system = FundamentalSystem.on(order, draw(dyadic(-16, 0)))
    t = system.anchor + draw(dyadic(0, 32))
    return TightnessCase(system, SamplingFunctional(t, draw(sides), order - 1, order))


def _check_tightness(case: TightnessCase, opts: SolveOptions) -> Optional[str]:
    m = Measurement(((1.0, case.functional),))
    constant = continuity_bound(m, case.system)
    if constant != 1.0:
        return f"continuity constant of {m} is {constant}, expected 1"
    witness = tightness_witness(case.functional, case.system)
    ratio = abs(apply(m, witness)) / gbv_norm(witness, case.system)
    if ratio < 0.99:
        return f"witness for {m} reaches only {ratio} of the bound"
    return None


class LinearityCase(NamedTuple):
    m: Measurement
    f: PolySpline
    h: PolySpline
    alpha: float
    beta: float


@st.composite
def linearity_cases(draw: Callable) -> LinearityCase:
    """Random (m, f, h) triples with coefficients alpha and beta."""
    order = draw(st.integers(1, 3))
    terms = draw(st.lists(st.tuples(st.sampled_from(COEFFICIENTS), reals(-2.0, 3.0), sides,
                                    st.integers(0, order - 1)), min_size=1, max_size=3))
    return LinearityCase(Measurement.combination(order, terms),
                         draw(splines(order, -2.0, 3.0)),
                         draw(splines(order, -2.0, 3.0)),
                         draw(reals(-2.0, 2.0)),
                         draw(reals(-2.0, 2.0)))


def _check_linearity(case: LinearityCase, opts: SolveOptions) -> Optional[str]:
    combined = apply(case.m, case.alpha * case.f + case.beta * case.h)
    separate = case.alpha * apply(case.m, case.f) + case.beta * apply(case.m, case.h)
    if not _close(combined, separate, 1e-12 * max(1.0, abs(separate))):
        return f"m(alpha f + beta h) = {combined}, alpha m(f) + beta m(h) = {separate}"
    return None


def _check_weakstar(n: int, opts: SolveOptions) -> Optional[str]:
    g, system = PiecewiseLinearTestFunction.hat(), FundamentalSystem.on(1, -2.0)
    sample = weakstar_counterexample(n, g, system)
    expected = 1.0 / n
    if abs(sample.pairing - expected) > 1e-15 * expected:
        return f"n = {n}: pairing {sample.pairing} != 1/n"
    if sample.trace != 1.0 or sample.jet != (0.0,):
        return f"n = {n}: trace {sample.trace} and jet {sample.jet}, expected 1 and (0,)"
    following = weakstar_counterexample(n + 1, g, system).pairing
    if not following < sample.pairing:
        return f"pairing does not decrease from n = {n} ({sample.pairing}) to n + 1 ({following})"
    return None


# Solver

def _check_oracle(problem: Problem, opts: SolveOptions) -> Optional[str]:
    exact = solve(problem, opts)
    recomputed, _ = objective(problem, exact.spline)
    if not _close(recomputed, exact.cost, 1e-12 * max(1.0, exact.cost)):
        return f"stored cost {exact.cost} disagrees with re-evaluated cost {recomputed}"
    grid = oracle_solve(problem, ORACLE_GRID_STEP, opts)
    if exact.cost > grid.cost + 1e-9:
        return f"exact cost {exact.cost} exceeds oracle cost {grid.cost}"
    if grid.cost > exact.cost + 1e-2 * max(1.0, exact.cost):
        return f"oracle cost {grid.cost} is far above exact cost {exact.cost}"
    return None


def _check_closed_form(_: Any, opts: SolveOptions) -> Optional[str]:
    problem = Problem(order=1,
                      measurements=(Measurement.single(0.0), Measurement.single(1.0)),
                      y=(0.0, 2.0),
                      loss=Loss.squared(),
                      lam=0.1)
    solution = solve(problem, opts)
    if solution.spline.knot_count != 1:
        return f"expected one knot, got {solution.spline.knots}"
    (x, w), = solution.spline.knots
    b = solution.spline.null_coeffs[0]
    if x != 1.0 or not _close(w, 1.9, 1e-9) or not _close(b, 0.05, 1e-9) or not _close(solution.cost, 0.195, 1e-9):
        return f"expected 0.05 + 1.9 u(. - 1) with cost 0.195, got {solution.spline} with cost {solution.cost}"
    return None


def _check_extreme_points(problem: Problem, opts: SolveOptions) -> Optional[str]:
    optimum = solve(problem, opts).cost
    vertices = enumerate_extreme_points(problem, opts=opts)
    if not vertices:
        return "no extreme point found"
    for vertex in vertices:
        if vertex.knot_count > problem.size:
            return f"extreme point with {vertex.knot_count} knots exceeds M = {problem.size}"
        if not _close(vertex.cost, optimum, 1e-9 * max(1.0, optimum)):
            return f"extreme point cost {vertex.cost} differs from optimum {optimum}"
    for first, second in combinations(vertices, 2):
        midpoint = 0.5 * first.spline + 0.5 * second.spline
        fitted = apply_all(problem.measurements, midpoint)
        if any(not _close(v, y, 1e-9) for v, y in zip(fitted, problem.y)):
            return f"midpoint {midpoint} violates the constraints"
        if not _close(tv_norm(derivative_measure(midpoint)), optimum, 1e-9 * max(1.0, optimum)):
            return f"midpoint {midpoint} is not optimal"
    return None


def _check_order_reduction(problem: Problem, opts: SolveOptions) -> Optional[str]:
    full = solve(problem, opts)
    reduced = solve(reduce_to_first_order(problem), opts)
    if len(full.spline.knots) != len(reduced.spline.knots):
        return f"order {problem.order} knots {full.spline.knots} vs order 1 knots {reduced.spline.knots}"
    for (x, w), (x1, w1) in zip(full.spline.knots, reduced.spline.knots):
        if not (_close(x, x1, 1e-9) and _close(w, w1, 1e-9)):
            return f"knot ({x}, {w}) does not match reduced knot ({x1}, {w1})"
    missing = set(range(problem.order - 1)) - set(full.report.free_null_directions)
    if missing:
        return f"null directions {sorted(missing)} are not reported free"
    return None


def _check_determinism(problem: Problem, opts: SolveOptions) -> Optional[str]:
    first, second = dumps_solution(solve(problem, opts)), dumps_solution(solve(problem, opts))
    return None if first == second else "two solves of the same problem serialize differently"


# Documents

class RoundTripCase(NamedTuple):
    problem: Problem
    solution: Solution


@st.composite
def round_trip_cases(draw: Callable) -> RoundTripCase:
    """Arbitrary problems and solutions, including weights, grids and finite intervals."""
    order = draw(st.integers(1, 3))
    size = draw(st.integers(1, 4))
    term = st.tuples(reals(-5.0, 5.0).filter(lambda c: c != 0.0), reals(-5.0, 5.0), sides, st.integers(0, order - 1))
    measurements = tuple(Measurement.combination(order, draw(st.lists(term, min_size=1, max_size=2)))
                         for _ in range(size))
    loss = draw(st.one_of(st.just(Loss.interpolation()),
                          st.just(Loss.squared()),
                          st.lists(reals(0.1, 3.0), min_size=size, max_size=size).map(Loss.squared)))
    right = draw(st.one_of(st.just(float("inf")), reals(5.0, 9.0)))
    grid = draw(st.one_of(st.none(), st.lists(reals(-3.0, 3.0), min_size=1, max_size=4).map(lambda g: tuple(sorted(g)))))
    problem = Problem(order=order,
                      measurements=measurements,
                      y=tuple(draw(st.lists(reals(-5.0, 5.0), min_size=size, max_size=size))),
                      loss=loss,
                      lam=draw(reals(0.0, 10.0)),
                      system=FundamentalSystem.on(order, draw(reals(-9.0, -5.0)), right),
                      grid=grid)
    spline = draw(splines(order, -3.0, 3.0, max_knots=4))
    report = Report(invisible_null_directions=tuple(range(draw(st.integers(0, order - 1)))),
                    warnings=draw(st.sampled_from(((), ("w",)))),
                    iterations=draw(st.integers(0, 1000)),
                    seed=draw(st.integers(0, 100)))
    solution = Solution(spline, draw(reals(0.0, 10.0)), spline.knot_count,
                        tuple(draw(st.lists(reals(-5.0, 5.0), min_size=size, max_size=size))), report)
    return RoundTripCase(problem, solution)


def _check_round_trip(case: RoundTripCase, opts: SolveOptions) -> Optional[str]:
    if parse_problem(dumps_problem(case.problem)) != case.problem:
        return f"problem document does not round-trip: {ProblemDocument.from_problem(case.problem)}"
    if parse_solution(dumps_solution(case.solution)) != case.solution:
        return f"solution document does not round-trip: {SolutionDocument.from_solution(case.solution)}"
    return None


INVARIANTS: Tuple[Invariant, ...] = (
    Invariant("tv triangle inequality", st.builds(MeasurePair, measures(), measures()), _check_tv_triangle),
    Invariant("cumulative jumps", _cumulative_cases(), _check_cumulative_jumps),
    Invariant("pairing bound", st.builds(PairingCase, piecewise_linear_functions(), measures()), _check_pairing_bound),
    Invariant("restrict to the real line", measures(), _check_restrict_to_line),
    Invariant("norm definiteness", _spline_pairs(), _check_norm_definiteness),
    Invariant("norm triangle and homogeneity", _spline_pairs(), _check_norm_axioms),
    Invariant("order-0 generalized trace", _trace_points(), _check_order_zero_trace),
    Invariant("side conventions", _jump_splines(), _check_side_conventions),
    Invariant("right-inverse identity", _measure_cases(), _check_right_inverse),
    Invariant("canonical decomposition", _decomposition_cases(), _check_decomposition),
    Invariant("projection idempotence", _projection_cases(), _check_projection_idempotent),
    Invariant("biorthogonality", st.integers(1, 6), _check_biorthogonality, max_cases=6),
    Invariant("causality", _causality_cases(), _check_causality),
    Invariant("locality", _locality_cases(), _check_locality),
    Invariant("kernel shift invariance", _shift_cases(), _check_shift_invariance),
    Invariant("continuity bound", bound_cases(), _check_bound),
    Invariant("bound tightness", _tightness_cases(), _check_tightness),
    Invariant("measurement linearity", linearity_cases(), _check_linearity),
    Invariant("weak* counterexample", st.integers(1, 1000), _check_weakstar),
    Invariant("closed-form solve", st.none(), _check_closed_form, max_cases=1),
    Invariant("solver vs oracle", top_order_problems(sizes=st.integers(1, 6)), _check_oracle, max_cases=10),
    Invariant("extreme points",
              top_order_problems(st.integers(1, 2), st.integers(1, 3), Loss.interpolation(), single_terms=True),
              _check_extreme_points, max_cases=20),
    Invariant("order reduction", top_order_problems(orders=st.integers(2, 3)), _check_order_reduction, max_cases=20),
    Invariant("determinism", top_order_problems(), _check_determinism, max_cases=5),
    Invariant("document round-trip", round_trip_cases(), _check_round_trip),
)


def _evaluate(invariant: Invariant, case: Any, opts: SolveOptions) -> Optional[str]:
    try:
        return invariant.check(case, opts)
    except Exception as e:
        return f"{type(e).__name__}: {e}"


def run_invariant(invariant: Invariant, seed: int, cases: int, opts: SolveOptions) -> CheckResult:
    """
    Run one invariant on up to `cases` hypothesis examples.

    Args:
        invariant (Invariant): The invariant.
        seed (int): Seed for hypothesis.
        cases (int): Example budget, capped by the invariant's max_cases.
        opts (SolveOptions): Solver options passed to the checker.

    Returns:
        CheckResult: Examples tried up to the first failure, and the minimized failing case.
    """
    count = cases if invariant.max_cases is None else min(cases, invariant.max_cases)
    if count <= 0:
        return CheckResult(invariant.name, True, 0)
    tried = 0
    failures: List[Tuple[Any, str]] = []

    @hypothesis_seed(seed)
    @settings(max_examples=count,
              database=None,
              deadline=None,
              verbosity=Verbosity.quiet,
              phases=(Phase.generate, Phase.shrink),
              report_multiple_bugs=False,
              suppress_health_check=list(HealthCheck))
    @given(invariant.strategy)
    def holds(case: Any) -> None:
        nonlocal tried
        if not failures:
            tried += 1
        message = _evaluate(invariant, case, opts)
        if message is not None:
            failures.append((case, message))
            raise InvariantViolation(message)

    try:
        holds()
    except Exception as e:
        # hypothesis replays the minimal failing example last
        case, failure = failures[-1] if failures else (None, f"{type(e).__name__}: {e}")
        logger.error(f"Invariant '{invariant.name}' failed after {tried} cases: {failure}")
        return CheckResult(invariant.name, False, tried, f"{failure}\n  minimized case: {case!r}")
    logger.debug(f"Invariant '{invariant.name}' held on {tried} cases")
    return CheckResult(invariant.name, True, tried)


def run_invariant_suite(seed: int,
                        cases: int,
                        opts: Optional[SolveOptions] = None,
                        invariants: Sequence[Invariant] = INVARIANTS) -> List[CheckResult]:
    """
    Run every invariant with its own hypothesis seed derived from (seed, position).

    Args:
        seed (int): Base seed.
        cases (int): Examples per invariant (capped per invariant for the expensive ones).
        opts (Optional[SolveOptions]): Solver options.
        invariants (Sequence[Invariant]): The invariants to run.

    Returns:
        List[CheckResult]: One result per invariant, in order.
    """
    if cases < 0:
        raise ValueError(f"cases must be nonnegative, got {cases}")
    opts = opts or SolveOptions(seed=seed)
    return [run_invariant(invariant, seed * 1024 + position, cases, opts)
            for position, invariant in enumerate(invariants)]
