"""Tests for sampling functionals, measurements and the weak* counterexample."""
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.bv_sampling.exceptions import OrderMismatchError
from src.bv_sampling.gbv_core import PolySpline, gbv_norm
from src.bv_sampling.invariants import bound_cases, linearity_cases
from src.bv_sampling.measures import PiecewiseLinearTestFunction, Side
from src.bv_sampling.sampling import (Measurement, SamplingFunctional, apply, apply_all, continuity_bound,
                                      weakstar_counterexample, weakstar_sequence_member)
from src.bv_sampling.systems import FundamentalSystem


class TestMeasurement:
    """Test cases for SamplingFunctional and Measurement."""

    def test_functional_validation(self):
        """Test that d must lie in [0, N-1] and t must be finite."""
        with pytest.raises(ValueError):
            SamplingFunctional(0.0, Side.PLUS, 2, 2)
        with pytest.raises(ValueError):
            SamplingFunctional(float("inf"), Side.PLUS, 0, 1)

    def test_top_order(self):
        """Test the top-order flag."""
        assert Measurement.single(0.0, d=1, order=2).is_top_order
        assert not Measurement.single(0.0, d=0, order=2).is_top_order

    def test_rejects_mixed_orders(self):
        """Test that terms must share one order."""
        with pytest.raises(OrderMismatchError):
            Measurement(((1.0, SamplingFunctional(0.0, Side.PLUS, 0, 1)),
                         (1.0, SamplingFunctional(1.0, Side.PLUS, 0, 2))))

    def test_rejects_zero_coefficient(self):
        """Test that zero coefficients are rejected."""
        with pytest.raises(ValueError):
            Measurement.single(0.0, coefficient=0.0)

    def test_combination_and_key(self):
        """Test building from tuples and the duplicate key."""
        m = Measurement.combination(1, [(1.0, 1.0, "plus", 0), (-1.0, 0.0, "+", 0)])

        assert m.abscissae == (1.0, 0.0)
        assert m.key() == ((1.0, 1.0, "plus", 0), (-1.0, 0.0, "plus", 0))
        assert str(m) == "1*delta_1^+ + -1*delta_0^+"


class TestApply:
    """Test cases for apply and apply_all."""

    def test_right_trace_of_step(self):
        """Test u^+(0) = 1."""
        assert apply(Measurement.single(0.0, Side.PLUS), PolySpline.green(1)) == 1.0

    def test_left_trace_of_step(self):
        """Test u^-(0) = 0."""
        assert apply(Measurement.single(0.0, Side.MINUS), PolySpline.green(1)) == 0.0

    def test_difference_of_traces(self):
        """Test (delta_1^+ - delta_0^+) on 1 + 2u(. - 0.5) = 3 - 1."""
        m = Measurement.combination(1, [(1.0, 1.0, Side.PLUS, 0), (-1.0, 0.0, Side.PLUS, 0)])
        f = PolySpline.build(1, [1.0], [(0.5, 2.0)])

        assert apply(m, f) == 2.0

    def test_apply_all(self):
        """Test apply_all keeps measurement order."""
        ms = [Measurement.single(t) for t in (-1.0, 0.0, 1.0)]

        assert apply_all(ms, PolySpline.green(1)) == (0.0, 1.0, 1.0)

    def test_order_mismatch(self):
        """Test that a measurement of another order is rejected."""
        with pytest.raises(OrderMismatchError):
            apply(Measurement.single(0.0, order=2), PolySpline.green(1))

    @settings(max_examples=1000, deadline=None)
    @given(linearity_cases())
    def test_linear(self, case):
        """Test m(alpha f + beta h) = alpha m(f) + beta m(h) to 1e-12 on random triples."""
        combined = apply(case.m, case.alpha * case.f + case.beta * case.h)
        separate = case.alpha * apply(case.m, case.f) + case.beta * apply(case.m, case.h)

        assert combined == pytest.approx(separate, abs=1e-12 * max(1.0, abs(separate)))


class TestContinuityBound:
    """Test cases for continuity_bound."""

    @pytest.mark.parametrize("side", list(Side))
    def test_first_order_trace(self, side):
        """Test that a unit first-order trace has bound 1 on either side."""
        assert continuity_bound(Measurement.single(0.5, side), FundamentalSystem.on(1, -1.0)) == 1.0

    @pytest.mark.parametrize("order", range(1, 6))
    def test_top_order_trace(self, order):
        """Test D^(N-1) delta_t has bound 1 for t right of the anchor."""
        m = Measurement.single(2.0, Side.MINUS, d=order - 1, order=order)

        assert continuity_bound(m, FundamentalSystem.on(order, -1.0)) == 1.0

    def test_homogeneity(self):
        """Test that the bound scales with the coefficient."""
        m = Measurement.single(0.0, coefficient=2.0)

        assert continuity_bound(m, FundamentalSystem.on(1, -1.0)) == 2.0

    def test_order_mismatch(self):
        """Test that a system of another order is rejected."""
        with pytest.raises(OrderMismatchError):
            continuity_bound(Measurement.single(0.0), FundamentalSystem.on(2, -1.0))

    @settings(max_examples=10_000, deadline=None)
    @given(bound_cases())
    def test_bound_holds(self, case):
        """Test |apply(m, f)| <= C ||f||_GBV on 10^4 random spline and measurement pairs."""
        value = abs(apply(case.m, case.f))
        bound = continuity_bound(case.m, case.system) * gbv_norm(case.f, case.system)

        assert value <= bound * (1.0 + 1e-12) + 1e-12


class TestWeakStarCounterexample:
    """Test cases for weakstar_counterexample."""

    @pytest.fixture
    def hat(self):
        return PiecewiseLinearTestFunction.hat()

    @pytest.fixture
    def system(self):
        return FundamentalSystem.on(1, -1.0)

    @pytest.mark.parametrize("n, pairing", [(1, 1.0), (2, 0.5), (10, 0.1)])
    def test_samples(self, hat, system, n, pairing):
        """Test pairing g(0) - g(1/n), trace 1 and jet 0."""
        sample = weakstar_counterexample(n, hat, system)

        assert sample.pairing == pairing
        assert sample.trace == 1.0
        assert sample.jet == (0.0,)

    def test_pairing_decreases_to_zero(self, hat, system):
        """Test the pairings shrink like 1/n while the trace stays at 1."""
        samples = [weakstar_counterexample(n, hat, system) for n in range(1, 1001)]

        pairings = [s.pairing for s in samples]
        assert all(a > b for a, b in zip(pairings[:-1], pairings[1:]))
        for n, sample in enumerate(samples, start=1):
            assert sample.pairing == pytest.approx(1.0 / n, rel=1e-15)
            assert sample.trace == 1.0
            assert sample.jet == (0.0,)

    @settings(max_examples=500, deadline=None)
    @given(n=st.integers(1, 10**6))
    def test_pairing_strictly_decreasing(self, n):
        """Test that each pairing is strictly below the previous one."""
        hat, system = PiecewiseLinearTestFunction.hat(), FundamentalSystem.on(1, -1.0)

        assert weakstar_counterexample(n + 1, hat, system).pairing < weakstar_counterexample(n, hat, system).pairing

    def test_sequence_member(self):
        """Test u(.) - u(. - 1/n) for n = 4."""
        assert weakstar_sequence_member(4).knots == ((0.0, 1.0), (0.25, -1.0))

    @pytest.mark.parametrize("n", [0, -1, 1.5])
    def test_rejects_bad_index(self, hat, system, n):
        """Test that n must be a positive integer."""
        with pytest.raises(ValueError):
            weakstar_counterexample(n, hat, system)

    def test_rejects_bad_system(self, hat):
        """Test that the system must be order 1 and anchored at or left of -1."""
        with pytest.raises(ValueError):
            weakstar_counterexample(1, hat, FundamentalSystem.on(2, -1.0))
        with pytest.raises(ValueError):
            weakstar_counterexample(1, hat, FundamentalSystem.on(1, 0.0))
