"""Tests for the candidate-knot reduction and the exact solver."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from src.bv_sampling.config import SolveOptions
from src.bv_sampling.exceptions import (ConvergenceError, InfeasibleProblemError, OrderMismatchError,
                                        WellPosednessError)
from src.bv_sampling.gbv_core import PolySpline, null_jet
from src.bv_sampling.invariants import dyadic, reals, sides
from src.bv_sampling.measures import Side
from src.bv_sampling.sampling import Measurement, apply_all
from src.bv_sampling.solver import (MODE_EXACT, MODE_GRID, Loss, LossKind, Problem, Report, Solution, activation,
                                    activation_matrix, candidate_knots, check_wellposedness, reduce_to_first_order,
                                    soft_threshold, solve, solve_lasso, solve_path)
from src.bv_sampling.systems import FundamentalSystem


def slope_problem(lam=0.1, loss=None):
    """Order-2 problem sampling only first derivatives."""
    measurements = tuple(Measurement.single(t, side, d=1, order=2)
                         for t, side in [(0.0, Side.PLUS), (1.0, Side.MINUS), (2.0, Side.PLUS)])
    return Problem(order=2, measurements=measurements, y=(0.0, 1.0, -1.0), loss=loss or Loss.squared(), lam=lam)


class TestLoss:
    """Test cases for Loss."""

    def test_weighted_squares(self):
        """Test sum of w_i r_i^2."""
        assert Loss.squared([1.0, 2.0]).evaluate([1.0, 0.5]) == 1.5

    def test_interpolation_contributes_nothing(self):
        """Test that the interpolation loss is zero on feasible residuals."""
        assert Loss.interpolation().evaluate([3.0]) == 0.0

    def test_rejects_bad_weights(self):
        """Test that weights must be positive and only squared losses carry them."""
        with pytest.raises(ValueError):
            Loss.squared([1.0, 0.0])
        with pytest.raises(ValueError):
            Loss(LossKind.INTERPOLATION, (1.0,))

    def test_weight_count_checked(self):
        """Test that the weight count must match M."""
        with pytest.raises(ValueError, match="Expected 3"):
            Loss.squared([1.0]).weight_vector(3)


class TestProblem:
    """Test cases for Problem validation."""

    def test_default_system(self, two_point_problem):
        """Test the default system [min abscissa - 1, inf)."""
        assert two_point_problem.system == FundamentalSystem.on(1, -1.0)
        assert two_point_problem.abscissae == (0.0, 1.0)

    def test_rejects_negative_lambda(self, two_point_problem):
        """Test that lambda must be nonnegative."""
        with pytest.raises(ValueError, match="lambda"):
            two_point_problem.with_lambda(-0.1)

    def test_rejects_length_mismatch(self):
        """Test that y must have one value per measurement."""
        with pytest.raises(ValueError):
            Problem(order=1, measurements=(Measurement.single(0.0),), y=(0.0, 1.0))

    def test_rejects_empty(self):
        """Test that a problem needs at least one measurement."""
        with pytest.raises(ValueError):
            Problem(order=1, measurements=(), y=())

    def test_rejects_order_mismatch(self):
        """Test that measurements must share the problem order."""
        with pytest.raises(OrderMismatchError):
            Problem(order=2, measurements=(Measurement.single(0.0),), y=(0.0,))
        with pytest.raises(OrderMismatchError):
            Problem(order=1, measurements=(Measurement.single(0.0),), y=(0.0,), system=FundamentalSystem.on(2, -1.0))

    def test_solution_knot_count_checked(self):
        """Test that knot_count must match the spline."""
        with pytest.raises(ValueError, match="knot_count"):
            Solution(PolySpline.green(1), 0.0, 0, (), Report())


class TestCandidateKnots:
    """Test cases for candidate_knots and activation."""

    def test_two_right_traces(self, two_point_problem):
        """Test classes (1,1), (0,1) and (0,0) represented at 0, 1 and 2."""
        candidates = candidate_knots(two_point_problem)

        assert [c.position for c in candidates] == [0.0, 1.0, 2.0]
        assert [c.activation for c in candidates] == [(1.0, 1.0), (0.0, 1.0), (0.0, 0.0)]

    def test_left_trace(self):
        """Test the left trace excludes tau = 0 from the active class."""
        problem = Problem(order=1, measurements=(Measurement.single(0.0, Side.MINUS),), y=(0.0,))

        candidates = candidate_knots(problem)
        assert [(c.position, c.activation) for c in candidates] == [(-1.0, (1.0,)), (0.0, (0.0,))]
        assert not candidates[0].cell.contains(0.0)
        assert candidates[1].cell.contains(0.0)

    def test_right_trace(self):
        """Test the right trace includes tau = 0 in the active class."""
        problem = Problem(order=1, measurements=(Measurement.single(0.0, Side.PLUS),), y=(0.0,))

        candidates = candidate_knots(problem)
        assert [(c.position, c.activation) for c in candidates] == [(0.0, (1.0,)), (1.0, (0.0,))]
        assert candidates[0].cell.contains(0.0)

    @settings(max_examples=50, deadline=None)
    @given(abscissae=st.lists(dyadic(-8, 8), min_size=3, max_size=3, unique=True),
           chosen=st.lists(sides, min_size=3, max_size=3))
    def test_classes_cover_their_cells(self, abscissae, chosen):
        """Test every point of a class cell has the class activation."""
        measurements = tuple(Measurement.single(t, side) for t, side in zip(sorted(abscissae), chosen))
        problem = Problem(order=1, measurements=measurements, y=(0.0,) * 3)
        for candidate in candidate_knots(problem):
            inside = [x for x in np.linspace(-4.0, 4.0, 321) if candidate.cell.contains(x)]
            for x in inside:
                assert tuple(activation(m, x) for m in problem.measurements) == candidate.activation

    def test_activation_matrix_matches_activation(self):
        """Test the vectorized responses against the scalar ones."""
        problem = slope_problem()
        positions = np.linspace(-2.0, 3.0, 41)

        matrix = activation_matrix(problem, positions)
        for k, tau in enumerate(positions):
            assert_allclose(matrix[:, k], [activation(m, tau) for m in problem.measurements])

    def test_mixed_order_needs_grid(self):
        """Test that value traces at N = 2 require an explicit grid."""
        measurements = (Measurement.single(0.0, order=2), Measurement.single(1.0, d=1, order=2))
        problem = Problem(order=2, measurements=measurements, y=(0.0, 1.0))

        with pytest.raises(ValueError, match="grid"):
            candidate_knots(problem)
        gridded = Problem(order=2, measurements=measurements, y=(0.0, 1.0), grid=(0.5, -0.5, 0.5))
        assert [c.position for c in candidate_knots(gridded)] == [-0.5, 0.5]


class TestCheckWellposedness:
    """Test cases for check_wellposedness."""

    def test_first_order_passes(self, two_point_problem):
        """Test that the two-point problem passes every check."""
        report = check_wellposedness(two_point_problem)

        assert report.passed
        assert report.status == "ok"
        assert report.warnings == ()
        assert report.mode == MODE_EXACT

    def test_invisible_constants(self):
        """Test that slope traces at N = 2 leave p_0 invisible."""
        report = check_wellposedness(slope_problem())

        assert report.passed
        assert report.invisible_null_directions == (0,)
        assert report.free_null_directions == (0,)
        assert any("p_0" in w for w in report.warnings)

    def test_contradictory_interpolation(self):
        """Test that conflicting constraints are reported infeasible."""
        problem = Problem(order=1,
                          measurements=(Measurement.single(0.0), Measurement.single(0.0)),
                          y=(0.0, 1.0),
                          loss=Loss.interpolation())

        report = check_wellposedness(problem)
        assert report.infeasible
        assert report.status == "infeasible"
        assert len(report.conflicts) == 1

    def test_zero_lambda(self, two_point_problem):
        """Test that lambda = 0 is ill-posed for a squared loss."""
        report = check_wellposedness(two_point_problem.with_lambda(0.0))

        assert not report.lambda_ok
        assert report.status == "ill-posed"

    def test_zero_lambda_fine_for_interpolation(self, interpolation_problem):
        """Test that lambda = 0 is allowed for interpolation."""
        assert check_wellposedness(interpolation_problem.with_lambda(0.0)).passed

    def test_mixed_order_mode(self):
        """Test the mode reported for a grid problem with lower-order terms."""
        measurements = (Measurement.single(0.0, order=2), Measurement.single(1.0, d=1, order=2))
        report = check_wellposedness(Problem(order=2, measurements=measurements, y=(0.0, 1.0), grid=(0.5,)))

        assert report.mode == MODE_GRID

    def test_report_dict_round_trip(self):
        """Test Report.to_dict and from_dict."""
        report = Report(invisible_null_directions=(0,), warnings=("w",), iterations=7, seed=3)

        assert Report.from_dict(report.to_dict()) == report
        assert report.to_dict()["status"] == "ok"


class TestSolve:
    """Test cases for solve."""

    def test_constant_fit(self):
        """Test that a single value trace is fitted by a constant at no cost."""
        problem = Problem(order=1, measurements=(Measurement.single(0.0),), y=(1.0,), loss=Loss.squared(), lam=0.1)

        solution = solve(problem)
        assert solution.knot_count == 0
        assert_allclose(solution.spline.null_coeffs, [1.0], atol=1e-12)
        assert solution.cost == pytest.approx(0.0, abs=1e-12)

    def test_closed_form(self, two_point_problem):
        """Test f = 0.05 + 1.9 u(. - 1) with cost 0.195."""
        solution = solve(two_point_problem)

        assert solution.knot_count == 1
        (position, weight), = solution.spline.knots
        assert position == 1.0
        assert weight == pytest.approx(1.9, abs=1e-9)
        assert solution.spline.null_coeffs[0] == pytest.approx(0.05, abs=1e-9)
        assert solution.cost == pytest.approx(0.195, abs=1e-9)
        assert_allclose(solution.residuals, [0.05, -0.05], atol=1e-9)
        assert solution.report.converged
        assert solution.report.seed == 0

    def test_interpolation(self, interpolation_problem):
        """Test a single unit knot in (0, 1] with total variation 1."""
        solution = solve(interpolation_problem)

        assert solution.knot_count == 1
        (position, weight), = solution.spline.knots
        assert 0.0 < position <= 1.0
        assert weight == pytest.approx(1.0, abs=1e-9)
        assert solution.cost == pytest.approx(1.0, abs=1e-9)
        assert_allclose(apply_all(interpolation_problem.measurements, solution.spline), [0.0, 1.0], atol=1e-9)

    def test_contradictory_interpolation_raises(self):
        """Test that solve raises on conflicting constraints."""
        problem = Problem(order=1,
                          measurements=(Measurement.single(0.0), Measurement.single(0.0)),
                          y=(0.0, 1.0),
                          loss=Loss.interpolation())

        with pytest.raises(InfeasibleProblemError):
            solve(problem)

    def test_zero_lambda_rejected(self, two_point_problem):
        """Test that solve refuses an ill-posed problem and attaches the report."""
        with pytest.raises(WellPosednessError) as excinfo:
            solve(two_point_problem.with_lambda(0.0))
        assert not excinfo.value.report.lambda_ok

    def test_zero_lambda_override(self, two_point_problem):
        """Test the override solves the unregularized fit and flags the report."""
        solution = solve(two_point_problem.with_lambda(0.0), SolveOptions(allow_ill_posed=True))

        assert solution.report.overridden
        assert "well-posedness check overridden" in solution.report.warnings
        assert_allclose(solution.residuals, [0.0, 0.0], atol=1e-9)

    def test_iteration_cap(self, two_point_problem):
        """Test that hitting the iteration cap raises ConvergenceError."""
        with pytest.raises(ConvergenceError):
            solve(two_point_problem, SolveOptions(max_iter=1))

    def test_invisible_direction_warned(self):
        """Test N = 2 slope data solves with p_0 reported free."""
        problem = slope_problem()

        solution = solve(problem)
        assert solution.report.invisible_null_directions == (0,)
        assert null_jet(solution.spline, problem.system)[0] == 0.0
        assert any("p_0" in w for w in solution.report.warnings)

    def test_weighted_loss_cost_matches_objective(self):
        """Test that the stored cost is the weighted objective."""
        problem = slope_problem(lam=0.05, loss=Loss.squared([1.0, 2.0, 0.5]))

        solution = solve(problem)
        residuals = np.asarray(solution.residuals)
        tv = sum(abs(w) for _, w in solution.spline.knots)
        expected = float(np.dot([1.0, 2.0, 0.5], residuals ** 2)) + 0.05 * tv
        assert solution.cost == pytest.approx(expected, abs=1e-12)

    def test_order_reduction_gives_same_knots(self):
        """Test that an all-top-order problem and its order-1 reduction share their knots."""
        problem = slope_problem()

        higher, lower = solve(problem), solve(reduce_to_first_order(problem))
        assert len(higher.spline.knots) == len(lower.spline.knots)
        for (x0, w0), (x1, w1) in zip(higher.spline.knots, lower.spline.knots):
            assert x0 == x1
            assert w0 == pytest.approx(w1, abs=1e-9)
        assert higher.cost == pytest.approx(lower.cost, abs=1e-9)

    def test_deterministic(self, two_point_problem):
        """Test that two solves return equal solutions."""
        assert solve(two_point_problem) == solve(two_point_problem)


class TestSolvePath:
    """Test cases for solve_path."""

    def test_results_in_input_order(self, two_point_problem):
        """Test cost lambda^2/2 + lambda(2 - lambda) for each lambda."""
        lambdas = [1.0, 0.1, 0.5]

        solutions = solve_path(two_point_problem, lambdas, workers=2)
        for lam, solution in zip(lambdas, solutions):
            assert solution.cost == pytest.approx(lam * lam / 2 + lam * (2 - lam), abs=1e-9)


class TestReduceToFirstOrder:
    """Test cases for reduce_to_first_order."""

    def test_reduction(self):
        """Test that the order-1 counterpart keeps the interval and data."""
        problem = slope_problem()

        reduced = reduce_to_first_order(problem)
        assert reduced.order == 1
        assert reduced.system.interval == problem.system.interval
        assert [m.key() for m in reduced.measurements] == [
            ((1.0, 0.0, "plus", 0),), ((1.0, 1.0, "minus", 0),), ((1.0, 2.0, "plus", 0),)]

    def test_rejects_lower_order_terms(self):
        """Test that only all-top-order problems reduce."""
        problem = Problem(order=2, measurements=(Measurement.single(0.0, order=2),), y=(0.0,), grid=(0.0,))

        with pytest.raises(ValueError):
            reduce_to_first_order(problem)


class TestSolveLasso:
    """Test cases for the proximal gradient lasso."""

    def test_soft_threshold(self):
        """Test elementwise shrinkage toward zero."""
        assert_allclose(soft_threshold(np.array([-3.0, 0.5, 2.0]), 1.0), [-2.0, 0.0, 1.0])

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), lam=reals(0.1, 1.0))
    def test_optimality_conditions(self, seed, lam):
        """Test the subgradient conditions at the returned point on Gaussian designs."""
        rng = np.random.default_rng(seed)
        B, z = rng.normal(size=(4, 6)), rng.normal(size=4)

        a, _, converged = solve_lasso(B, z, lam, 1e-12, 50000)

        assert converged
        gradient = 2.0 * B.T @ (z - B @ a)
        for g, value in zip(gradient, a):
            if value != 0.0:
                assert g == pytest.approx(lam * np.sign(value), abs=1e-6)
            else:
                assert abs(g) <= lam + 1e-6

    def test_empty_design(self):
        """Test that a design with no columns returns immediately."""
        a, iterations, converged = solve_lasso(np.zeros((2, 0)), np.ones(2), 1.0, 1e-12, 10)

        assert a.size == 0 and iterations == 0 and converged
