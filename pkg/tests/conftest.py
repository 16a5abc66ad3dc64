"""Pytest configuration file."""
import os
from pathlib import Path

import pytest
from unittest.mock import patch

from src.bv_sampling.config import SolveOptions
from src.bv_sampling.measures import Side
from src.bv_sampling.sampling import Measurement
from src.bv_sampling.solver import Loss, Problem

PROBLEMS_DIR = Path(__file__).resolve().parent.parent / "problems"


@pytest.fixture(autouse=True)
def mock_env_vars():
    """Fixture to mock environment variables for all tests."""
    with patch.dict(os.environ, {
        'BV_SAMPLING_TOL': '1e-12',
        'BV_SAMPLING_MAX_ITER': '50000',
        'BV_SAMPLING_SEED': '0',
        'BV_SAMPLING_MAX_GRID': '1000000',
        'BV_SAMPLING_WORKERS': '2',
        'BV_SAMPLING_LOG_LEVEL': 'WARNING',
        'NO_COLOR': '1'
    }):
        yield


@pytest.fixture
def problems_dir():
    """Directory of the bundled problem and spline documents."""
    return PROBLEMS_DIR


@pytest.fixture
def opts():
    """Default solver options."""
    return SolveOptions()


@pytest.fixture
def two_point_problem():
    """delta_0^+ = 0 and delta_1^+ = 2 with unweighted squares and lambda = 0.1."""
    return Problem(order=1,
                   measurements=(Measurement.single(0.0), Measurement.single(1.0)),
                   y=(0.0, 2.0),
                   loss=Loss.squared(),
                   lam=0.1)


@pytest.fixture
def interpolation_problem():
    """delta_0^+ = 0 and delta_1^+ = 1 as hard constraints."""
    return Problem(order=1,
                   measurements=(Measurement.single(0.0, Side.PLUS), Measurement.single(1.0, Side.PLUS)),
                   y=(0.0, 1.0),
                   loss=Loss.interpolation())
