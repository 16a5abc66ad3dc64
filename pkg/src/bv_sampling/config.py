"""Configuration module for the BV sampling toolkit."""
import os
from dataclasses import dataclass
from typing import Optional

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


@dataclass(frozen=True)
class SolveOptions:
    """Options shared by the solver entry points."""

    tol: float = 1e-12
    max_iter: int = 50000
    seed: int = 0
    allow_ill_posed: bool = False


class Config:
    """Configuration class for the BV sampling toolkit."""

    def __init__(self,
                 tol: Optional[float] = None,
                 max_iter: Optional[int] = None,
                 seed: Optional[int] = None) -> None:
        """
        Initialize configuration with environment variables or explicit values.

        Args:
            tol (Optional[float]): Solver tolerance. Takes precedence over BV_SAMPLING_TOL.
            max_iter (Optional[int]): Iteration cap. Takes precedence over BV_SAMPLING_MAX_ITER.
            seed (Optional[int]): Random seed. Takes precedence over BV_SAMPLING_SEED.
        """
        self.tol = tol if tol is not None else float(os.getenv("BV_SAMPLING_TOL", "1e-12"))
        self.max_iter = max_iter if max_iter is not None else int(os.getenv("BV_SAMPLING_MAX_ITER", "50000"))
        self.seed = seed if seed is not None else int(os.getenv("BV_SAMPLING_SEED", "0"))
        self.max_grid = int(os.getenv("BV_SAMPLING_MAX_GRID", "1000000"))
        self.workers = int(os.getenv("BV_SAMPLING_WORKERS", "4"))
        self.log_level = os.getenv("BV_SAMPLING_LOG_LEVEL", "INFO").upper()
        self.no_color = "NO_COLOR" in os.environ

    def get_solve_options(self, allow_ill_posed: bool = False) -> SolveOptions:
        """
        Get solver options built from this configuration.

        Args:
            allow_ill_posed (bool): Whether a failed well-posedness check is overridden.

        Returns:
            SolveOptions: Options for solve, oracle_solve and the invariant suite.
        """
        if self.tol <= 0:
            raise ValueError(f"Tolerance must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")
        return SolveOptions(tol=self.tol,
                            max_iter=self.max_iter,
                            seed=self.seed,
                            allow_ill_posed=allow_ill_posed)
