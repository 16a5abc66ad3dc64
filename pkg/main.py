#!/usr/bin/env python3
"""
Example script that solves the bundled two-measurement problem.

This script demonstrates how to:
1. Load a problem document
2. Check its well-posedness
3. Solve it exactly and on a dense knot grid
4. Enumerate the extreme points of its solution set
"""
import os
import sys
import logging
from pathlib import Path

from dotenv import load_dotenv

# Add the parent directory to the path so we can import the package
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

PROBLEM_PATH = Path(__file__).resolve().parent / "problems" / "two_measurements.json"


def main(problem_path: Path = PROBLEM_PATH, grid_step: float = 1e-3) -> float:
    """Solve a problem file both ways and return the exact cost."""
    from src.bv_sampling.config import Config
    from src.bv_sampling.documents import load_problem
    from src.bv_sampling.extreme_points import enumerate_extreme_points
    from src.bv_sampling.oracle import oracle_solve
    from src.bv_sampling.solver import check_wellposedness, solve

    # Configure logging
    logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    logger = logging.getLogger(__name__)

    load_dotenv()
    opts = Config().get_solve_options()

    try:
        problem = load_problem(problem_path)
        report = check_wellposedness(problem)
        logger.info(f"Well-posedness: {report.status}")

        exact = solve(problem, opts)
        logger.info(f"Exact cost {exact.cost:.12g} with knots {exact.spline.knots}")

        grid = oracle_solve(problem, grid_step, opts)
        logger.info(f"Grid cost {grid.cost:.12g} (step {grid_step:g})")

        for vertex in enumerate_extreme_points(problem, opts=opts):
            logger.info(f"Extreme point: {vertex.spline}")
        return exact.cost

    except Exception as e:
        logger.error(f"Error solving {problem_path}: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
