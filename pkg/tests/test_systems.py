"""Tests for fundamental systems, the null-space projector and the right-inverse."""
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.bv_sampling.exceptions import LocalityError, OrderMismatchError
from src.bv_sampling.gbv_core import PolySpline, derivative_measure, eval_trace, generalized_trace, null_jet
from src.bv_sampling.invariants import atomic_measures, dyadic, reals, sides, splines, systems
from src.bv_sampling.measures import Interval, Side, SignedMeasure, tv_norm
from src.bv_sampling.systems import (FundamentalSystem, kernel, kernel_derivative, kernel_sup, project_null,
                                     right_inverse)


def assert_same_traces(f, g, points, tol=1e-9):
    for t in points:
        for d in range(f.order):
            for side in Side:
                expected = generalized_trace(g, t, side, d)
                assert generalized_trace(f, t, side, d) == pytest.approx(expected, abs=tol * max(1.0, abs(expected)))


class TestFundamentalSystem:
    """Test cases for FundamentalSystem."""

    def test_on_infinite_right_end(self):
        """Test the anchor and interval of [a, inf)."""
        system = FundamentalSystem.on(2, -1.0)

        assert system.anchor == -1.0
        assert system.interval == Interval(-1.0, math.inf, True, False)

    def test_default_for(self):
        """Test the default interval [min - 1, inf)."""
        assert FundamentalSystem.default_for(1, [0.5, -2.0, 3.0]).anchor == -3.0
        with pytest.raises(ValueError):
            FundamentalSystem.default_for(1, [])

    def test_requires_closed_finite_left_end(self):
        """Test that open or infinite left ends are rejected."""
        with pytest.raises(ValueError):
            FundamentalSystem(1, Interval(0.0, 1.0, False, True))
        with pytest.raises(ValueError):
            FundamentalSystem(1, Interval.real_line())

    @pytest.mark.parametrize("order", range(1, 7))
    def test_biorthogonality_is_exact(self, order):
        """Test <phi_i, p_j> is the identity for N up to 6."""
        system = FundamentalSystem.on(order, -1.5)

        expected = [[1.0 if i == j else 0.0 for j in range(order)] for i in range(order)]
        assert system.biorthogonality_matrix() == expected

    @pytest.mark.parametrize("order", range(1, 7))
    def test_duals_of_basis_splines(self, order):
        """Test <phi_i, p_j> through the spline form of p_j."""
        system = FundamentalSystem.on(order, 0.75)

        for i in range(order):
            for j in range(order):
                assert system.dual(i, system.basis_spline(j)) == pytest.approx(1.0 if i == j else 0.0, abs=1e-12)

    def test_restrict(self):
        """Test the nested system is anchored at the new left end."""
        system = FundamentalSystem.on(2, -1.0)

        assert system.restrict(Interval.closed(0.0, 1.0)).anchor == 0.0
        assert system.restrict(Interval(-1.0, math.inf, True, False)) == system

    def test_restrict_rejects_non_nested(self):
        """Test that intervals sticking out of K raise LocalityError."""
        system = FundamentalSystem.on(1, -1.0, 2.0)

        with pytest.raises(LocalityError):
            system.restrict(Interval.closed(-2.0, 0.0))
        with pytest.raises(LocalityError):
            system.restrict(Interval.closed(0.0, 3.0))


class TestProjectNull:
    """Test cases for project_null."""

    def test_fixes_constants(self):
        """Test that constants are their own projection."""
        f = PolySpline.polynomial(1, [2.5])

        assert project_null(f, FundamentalSystem.on(1, -1.0)) == f

    def test_step_projects_to_zero(self):
        """Test u^+(-1) = 0."""
        assert project_null(PolySpline.green(1), FundamentalSystem.on(1, -1.0)).is_zero

    def test_step_with_constant(self):
        """Test f^+(-1) = 1 for 1 + 2u."""
        f = PolySpline.build(1, [1.0], [(0.0, 2.0)])

        assert project_null(f, FundamentalSystem.on(1, -1.0)) == PolySpline.polynomial(1, [1.0])

    @settings(max_examples=200, deadline=None)
    @given(st.data())
    def test_idempotent(self, data):
        """Test P P f = P f and that P f is a polynomial."""
        system = data.draw(systems())
        f = data.draw(splines(system.order, system.anchor - 1.0, system.anchor + 4.0))

        p = project_null(f, system)
        assert p.knots == ()
        assert_same_traces(project_null(p, system), p, [system.anchor, 0.0, 2.0], tol=1e-12)

    def test_order_mismatch(self):
        """Test that a spline of another order is rejected."""
        with pytest.raises(OrderMismatchError):
            project_null(PolySpline.zero(1), FundamentalSystem.on(2, 0.0))


class TestRightInverse:
    """Test cases for right_inverse."""

    def test_zero_measure(self):
        """Test that the zero measure inverts to the zero spline."""
        assert right_inverse(SignedMeasure.zero(), FundamentalSystem.on(3, 0.0)).is_zero

    def test_step(self):
        """Test D u = delta_0 with u^+(-1) = 0."""
        assert right_inverse(SignedMeasure.dirac(0.0), FundamentalSystem.on(1, -1.0)) == PolySpline.green(1)

    def test_hinge(self):
        """Test the order-2 inverse of delta_0 is the hinge."""
        assert right_inverse(SignedMeasure.dirac(0.0), FundamentalSystem.on(2, -1.0)) == PolySpline.green(2)

    def test_atom_at_anchor_is_corrected(self):
        """Test an atom on the anchor is compensated so the right trace there vanishes."""
        system = FundamentalSystem.on(1, 0.0)
        g = right_inverse(SignedMeasure.dirac(0.0), system)

        assert null_jet(g, system) == (0.0,)
        assert derivative_measure(g) == SignedMeasure.dirac(0.0)

    def test_rejects_atoms_outside(self):
        """Test that atoms left of K raise LocalityError."""
        with pytest.raises(LocalityError):
            right_inverse(SignedMeasure.dirac(-2.0), FundamentalSystem.on(1, -1.0))

    def test_rejects_density(self):
        """Test that measures with a density part are rejected."""
        with pytest.raises(ValueError, match="atomic"):
            right_inverse(SignedMeasure.build(density=[(0.0, 1.0, 1.0)]), FundamentalSystem.on(1, -1.0))

    @pytest.mark.parametrize("order", range(1, 5))
    @settings(max_examples=1000, deadline=None)
    @given(mu=atomic_measures(-1.0, 3.0, min_atoms=1))
    def test_right_inverse_identity(self, order, mu):
        """Test D^N R mu = mu and <phi_j, R mu> = 0 on random measures, 1000 per order."""
        system = FundamentalSystem.on(order, -1.0)
        g = right_inverse(mu, system)

        recovered = derivative_measure(g)
        assert [x for x, _ in recovered.atoms] == [x for x, _ in mu.atoms]
        for (_, w), (_, v) in zip(mu.atoms, recovered.atoms):
            assert v == pytest.approx(w, abs=1e-12)
        assert all(abs(c) <= 1e-12 * max(1.0, tv_norm(mu)) for c in null_jet(g, system))

    @pytest.mark.parametrize("order", range(1, 5))
    @settings(max_examples=200, deadline=None)
    @given(data=st.data())
    def test_canonical_decomposition(self, order, data):
        """Test f = P f + R(D^N f) at 100 random traces per spline."""
        system = FundamentalSystem.on(order, data.draw(reals(-2.0, 0.0)))
        a = system.anchor
        f = data.draw(splines(order, a, a + 4.0))
        points = data.draw(st.lists(st.tuples(reals(a, a + 5.0), sides, st.integers(0, order - 1)),
                                    min_size=100, max_size=100))

        rebuilt = project_null(f, system) + right_inverse(derivative_measure(f), system)
        assert rebuilt.knots == f.knots
        for t, side, d in points:
            expected = generalized_trace(f, t, side, d)
            tol = 1e-10 * max(1.0, abs(expected))
            assert generalized_trace(rebuilt, t, side, d) == pytest.approx(expected, abs=tol)

    @settings(max_examples=500, deadline=None)
    @given(data=st.data())
    def test_causal(self, data):
        """Test that R mu vanishes left of the support of mu."""
        system = data.draw(systems())
        start = system.anchor + data.draw(reals(0.5, 2.0))
        mu = data.draw(atomic_measures(start, start + 3.0, min_atoms=1))
        t = data.draw(reals(system.anchor, start, exclude_max=True))

        g = right_inverse(mu, system)
        for side in Side:
            assert abs(eval_trace(g, t, side)) <= 1e-12


class TestKernel:
    """Test cases for kernel and kernel_sup."""

    def test_shift_invariant_inside(self):
        """Test g(1, 0) = u(1) when tau > a."""
        assert kernel(FundamentalSystem.on(1, -1.0), 1.0, 0.0, Side.PLUS) == 1.0

    def test_correction_left_of_anchor(self):
        """Test g(-2, -3) = u(1) - 1 = 0 when tau <= a."""
        assert kernel(FundamentalSystem.on(1, -1.0), -2.0, -3.0, Side.PLUS) == 0.0

    @pytest.mark.parametrize("order", range(1, 5))
    def test_causal(self, order):
        """Test that the kernel vanishes for t < tau once tau is inside K."""
        system = FundamentalSystem.on(order, -1.0)

        for side in Side:
            assert kernel(system, 0.5, 1.0, side) == 0.0

    def test_matches_greens_inside(self):
        """Test local shift invariance for order 3."""
        system = FundamentalSystem.on(3, 0.0)

        assert kernel(system, 3.0, 1.0, Side.PLUS) == pytest.approx(2.0)

    @pytest.mark.parametrize("order, d", [(n, d) for n in range(1, 5) for d in range(n)])
    @settings(max_examples=200, deadline=None)
    @given(t=reals(-1.0, 3.0), tau=reals(-1.0, 3.0), side=sides)
    def test_kernel_sup_bounds_kernel(self, order, d, t, tau, side):
        """Test |D^d g(t, tau)| <= kernel_sup for tau in K."""
        system = FundamentalSystem.on(order, -1.0)

        assert abs(kernel_derivative(system, t, tau, side, d)) <= kernel_sup(system, t, d) + 1e-12

    @pytest.mark.parametrize("order", range(1, 5))
    @settings(max_examples=300, deadline=None)
    @given(tau=dyadic(9, 40), h=dyadic(-8, 32), offset=dyadic(-24, 24), side=sides)
    def test_shift_invariant_on_interior(self, order, tau, h, offset, side):
        """Test g(t + h, tau + h) = g(t, tau) while tau and tau + h stay right of the anchor."""
        system = FundamentalSystem.on(order, 0.0)
        base = kernel(system, tau + offset, tau, side)

        assert kernel(system, tau + offset + h, tau + h, side) == pytest.approx(base, abs=1e-12 * max(1.0, abs(base)))

    def test_kernel_sup_top_order(self):
        """Test that the top-order sup is 1 and d = N is rejected."""
        assert kernel_sup(FundamentalSystem.on(3, -1.0), 5.0, 2) == 1.0
        with pytest.raises(ValueError):
            kernel_sup(FundamentalSystem.on(3, -1.0), 5.0, 3)
