"""Tests for extreme-point enumeration."""
import numpy as np
import pytest

from src.bv_sampling.exceptions import ScaleGuardError
from src.bv_sampling.extreme_points import enumerate_extreme_points
from src.bv_sampling.measures import Interval
from src.bv_sampling.sampling import Measurement
from src.bv_sampling.solver import CandidateKnot, Loss, Problem


class TestEnumerateExtremePoints:
    """Test cases for enumerate_extreme_points."""

    def test_unique_vertex(self, interpolation_problem):
        """Test the single unit knot at the representative of (0, 1]."""
        vertices = enumerate_extreme_points(interpolation_problem)

        assert len(vertices) == 1
        assert vertices[0].spline.knots == ((1.0, pytest.approx(1.0, abs=1e-12)),)
        assert vertices[0].cost == pytest.approx(1.0, abs=1e-12)

    def test_zero_data(self):
        """Test that zero data gives the zero spline as the only vertex."""
        problem = Problem(order=1, measurements=(Measurement.single(0.0),), y=(0.0,), loss=Loss.interpolation())

        vertices = enumerate_extreme_points(problem)
        assert len(vertices) == 1
        assert vertices[0].knot_count == 0
        assert vertices[0].cost == 0.0

    def test_duplicate_columns_deduplicated(self, interpolation_problem, mocker):
        """Test that a candidate repeating another's activation leaves the vertex count unchanged."""
        candidates = [CandidateKnot(0.0, (1.0, 1.0), Interval(-np.inf, 0.0, False, True)),
                      CandidateKnot(0.5, (0.0, 1.0), Interval(0.0, 1.0, False, True)),
                      CandidateKnot(1.0, (0.0, 1.0), Interval(0.0, 1.0, False, True)),
                      CandidateKnot(2.0, (0.0, 0.0), Interval(1.0, np.inf, False, False))]
        mocker.patch("src.bv_sampling.extreme_points.candidate_knots", return_value=candidates)

        vertices = enumerate_extreme_points(interpolation_problem)
        assert len(vertices) == 1
        assert vertices[0].spline.knots[0][0] == 0.5

    def test_squared_loss_uses_fitted_values(self, two_point_problem):
        """Test the penalized problem's vertex is its unique solution."""
        vertices = enumerate_extreme_points(two_point_problem)

        assert len(vertices) == 1
        (x, w), = vertices[0].spline.knots
        assert x == 1.0
        assert w == pytest.approx(1.9, abs=1e-9)
        assert vertices[0].cost == pytest.approx(0.195, abs=1e-9)

    def test_at_most_m_knots(self):
        """Test vertex sizes and costs on combination measurements."""
        measurements = (Measurement.combination(1, [(1.0, 1.0, "plus", 0), (-1.0, -1.0, "plus", 0)]),
                        Measurement.combination(1, [(1.0, 2.0, "plus", 0), (-1.0, 0.0, "plus", 0)]),
                        Measurement.single(-2.0))
        problem = Problem(order=1, measurements=measurements, y=(1.0, 1.0, 0.0), loss=Loss.interpolation())

        vertices = enumerate_extreme_points(problem)
        assert vertices
        for vertex in vertices:
            assert vertex.knot_count <= problem.size
            assert vertex.cost == pytest.approx(vertices[0].cost, abs=1e-9)

    def test_max_support_limits_search(self, interpolation_problem):
        """Test that max_support 0 finds nothing and negative values are rejected."""
        assert enumerate_extreme_points(interpolation_problem, max_support=0) == []
        with pytest.raises(ValueError):
            enumerate_extreme_points(interpolation_problem, max_support=-1)

    def test_too_many_measurements(self):
        """Test the guard on M."""
        problem = Problem(order=1,
                          measurements=tuple(Measurement.single(float(t)) for t in range(5)),
                          y=(0.0,) * 5,
                          loss=Loss.interpolation())

        with pytest.raises(ScaleGuardError, match="measurements"):
            enumerate_extreme_points(problem)

    def test_too_many_candidates(self):
        """Test the guard on the number of distinct grid columns."""
        measurements = (Measurement.single(0.0, order=2), Measurement.single(1.0, d=1, order=2))
        problem = Problem(order=2, measurements=measurements, y=(0.0, 1.0), loss=Loss.interpolation(),
                          grid=tuple(np.linspace(-3.0, -0.1, 20).tolist()))

        with pytest.raises(ScaleGuardError, match="candidates"):
            enumerate_extreme_points(problem)
