#!/usr/bin/env python3
"""
Command Line Interface for the BV sampling toolkit.

This module solves problem files, evaluates spline traces, runs the invariant
suite and writes the weak* demonstration and extreme-point documents.

Exit status: 0 on success, 1 on I/O, schema or usage errors, 2 when a problem is
infeasible, ill-posed, not converged or too large, 3 when an invariant fails.
"""
import argparse
import csv
import io
import logging
import re
import sys
import tempfile
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from hypothesis import strategies as st

from .config import Config, SolveOptions
from .documents import (dumps_problem, dumps_solution, dumps_solutions, dumps_spline, load_problem, load_spline,
                        write_text)
from .exceptions import ConvergenceError, InfeasibleProblemError, ScaleGuardError, WellPosednessError
from .extreme_points import enumerate_extreme_points
from .gbv_core import PolySpline, derivative_measure, generalized_trace
from .invariants import INVARIANTS, Invariant, reals, run_invariant_suite, splines, top_order_problems
from .measures import PiecewiseLinearTestFunction, Side, tv_norm
from .oracle import oracle_solve
from .sampling import weakstar_counterexample
from .solver import Problem, solve, solve_path
from .systems import FundamentalSystem

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
SOLVER_ERRORS = (InfeasibleProblemError, WellPosednessError, ConvergenceError, ScaleGuardError)
TRACE_ROWS = 1000
EXIT_STATUSES = (0, 1, 2, 3)
NEGATIVE_QUERY = re.compile(r"^-[\d.]")


class ColorFormatter(logging.Formatter):
    """Formatter that colours the level name."""

    COLORS = {
        logging.DEBUG: "\033[36m",
        logging.INFO: "\033[32m",
        logging.WARNING: "\033[33m",
        logging.ERROR: "\033[31m",
        logging.CRITICAL: "\033[1;31m",
    }
    RESET = "\033[0m"

    def format(self, record: logging.LogRecord) -> str:
        color = self.COLORS.get(record.levelno)
        if not color:
            return super().format(record)
        original = record.levelname
        record.levelname = f"{color}{original}{self.RESET}"
        try:
            return super().format(record)
        finally:
            record.levelname = original


class ArgumentParser(argparse.ArgumentParser):
    """Argument parser that exits with status 1 on usage errors."""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def configure_logging(config: Config) -> None:
    """Configure the root logger on standard error, coloured on terminals unless NO_COLOR is set."""
    handler = logging.StreamHandler(sys.stderr)
    use_color = not config.no_color and hasattr(sys.stderr, "isatty") and sys.stderr.isatty()
    handler.setFormatter(ColorFormatter(LOG_FORMAT) if use_color else logging.Formatter(LOG_FORMAT))
    logging.basicConfig(level=getattr(logging, config.log_level, logging.INFO), handlers=[handler])


def solve_options(args: argparse.Namespace, config: Config) -> SolveOptions:
    return config.get_solve_options(allow_ill_posed=getattr(args, "allow_ill_posed", False))


def parse_query(text: str) -> Tuple[float, Side, int]:
    """Parse a `t:side:d` trace query; d defaults to 0."""
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise ValueError(f"Trace query '{text}' must look like t:side or t:side:d")
    d = int(parts[2]) if len(parts) == 3 else 0
    return float(parts[0]), Side.parse(parts[1]), d


def parse_lambda_grid(text: str) -> List[float]:
    values = [float(v) for v in text.split(",") if v.strip()]
    if not values:
        raise ValueError("--lambda-grid needs at least one value")
    return values


def _format(value: float) -> str:
    return f"{value:.17g}"


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[float]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_format(v) if isinstance(v, float) else v for v in row])
    return buffer.getvalue()


def trace_table(problem: Problem, spline: PolySpline) -> str:
    """
    CSV of f^-, f^+, D^{N-1} f^- and D^{N-1} f^+ on a uniform grid over the abscissae.

    Every knot and abscissa gets its own row on top of the TRACE_ROWS grid rows,
    even where it coincides with a grid point.
    """
    abscissae = problem.abscissae
    grid = np.linspace(abscissae[0] - 1.0, abscissae[-1] + 1.0, TRACE_ROWS).tolist()
    points = sorted(grid + list(abscissae) + [x for x, _ in spline.knots])
    top = spline.order - 1
    rows = [(t,
             generalized_trace(spline, t, Side.MINUS, 0),
             generalized_trace(spline, t, Side.PLUS, 0),
             generalized_trace(spline, t, Side.MINUS, top),
             generalized_trace(spline, t, Side.PLUS, top))
            for t in points]
    return _csv_text(["t", "f_minus", "f_plus", "dtop_minus", "dtop_plus"], rows)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        write_text(out, text)
    else:
        sys.stdout.write(text)


def cmd_solve(args: argparse.Namespace, config: Config) -> None:
    """
    Solve a problem file.

    Args:
        args: Command line arguments.
        config: Configuration.
    """
    try:
        opts = solve_options(args, config)
        problem = load_problem(args.problem)
        if args.lambda_grid:
            if args.csv:
                raise ValueError("--csv cannot be combined with --lambda-grid")
            lambdas = parse_lambda_grid(args.lambda_grid)
            solutions = solve_path(problem, lambdas, opts, workers=config.workers)
            _emit(dumps_solutions(solutions), args.out)
            logger.info(f"Solved {len(solutions)} problems along the lambda path")
            return
        if args.oracle_step is not None:
            solution = oracle_solve(problem, args.oracle_step, opts, max_candidates=config.max_grid)
        else:
            solution = solve(problem, opts)
        _emit(dumps_solution(solution), args.out)
        if args.csv:
            write_text(args.csv, trace_table(problem, solution.spline))
        logger.info(f"Solution status: {solution.report.status}, cost {solution.cost!r}")

    except InfeasibleProblemError as e:
        logger.error(f"Problem is infeasible: {e}")
        sys.exit(2)
    except WellPosednessError as e:
        status = e.report.status if e.report is not None else "ill-posed"
        logger.error(f"Problem is {status}: {e}")
        if e.report is not None:
            for warning in e.report.warnings:
                logger.error(f"  {warning}")
        sys.exit(2)
    except SOLVER_ERRORS as e:
        logger.error(f"Error solving problem: {e}")
        sys.exit(2)
    except (OSError, ValueError) as e:
        logger.error(f"Error reading problem: {e}")
        sys.exit(1)


def cmd_eval(args: argparse.Namespace, config: Config) -> None:
    """
    Print traces of a spline document, one line per --at query.

    Args:
        args: Command line arguments.
        config: Configuration.
    """
    try:
        spline = load_spline(args.spline)
        lines = []
        for query in args.at:
            t, side, d = parse_query(query)
            value = generalized_trace(spline, t, side, d)
            lines.append(f"{_format(t)} {side.value} {d} {_format(value)}\n")
        sys.stdout.write("".join(lines))

    except (OSError, ValueError) as e:
        logger.error(f"Error evaluating spline: {e}")
        sys.exit(1)


def cmd_check(args: argparse.Namespace, config: Config) -> None:
    """
    Run the invariant suite and print a pass/fail table.

    Args:
        args: Command line arguments.
        config: Configuration.
    """
    seed = config.seed
    try:
        opts = solve_options(args, config)
        results = run_invariant_suite(seed, args.cases, opts, INVARIANTS + CLI_INVARIANTS)
    except ValueError as e:
        logger.error(f"Error running invariant suite: {e}")
        sys.exit(1)

    if args.cases == 0:
        logger.warning("No cases requested; every invariant passes vacuously")
    width = max(len(r.name) for r in results)
    lines = [f"{'invariant'.ljust(width)}  cases  result\n"]
    for r in results:
        lines.append(f"{r.name.ljust(width)}  {r.cases:5d}  {'PASS' if r.passed else 'FAIL'}\n")
    sys.stdout.write("".join(lines))

    failures = [r for r in results if not r.passed]
    if failures:
        for r in failures:
            sys.stdout.write(f"\n{r.name}: {r.failure}\n")
        logger.error(f"{len(failures)} of {len(results)} invariants failed (seed {seed})")
        sys.exit(3)
    logger.info(f"All {len(results)} invariants hold (seed {seed}, {args.cases} cases)")


def cmd_demo_weakstar(args: argparse.Namespace, config: Config) -> None:
    """
    Write the weak* counterexample table: the pairing tends to 0 while the trace stays 1.

    Args:
        args: Command line arguments.
        config: Configuration.
    """
    try:
        if args.n_max < 1:
            raise ValueError(f"--n-max must be at least 1, got {args.n_max}")
        g = PiecewiseLinearTestFunction.hat()
        system = FundamentalSystem.on(1, -1.0)
        rows = []
        for n in range(1, args.n_max + 1):
            sample = weakstar_counterexample(n, g, system)
            rows.append((n, sample.pairing, sample.trace, sample.jet[0]))
        _emit(_csv_text(["n", "pairing_hat", "trace_plus_at_0", "jet0"], rows), args.out)

    except (OSError, ValueError) as e:
        logger.error(f"Error writing weak* demonstration: {e}")
        sys.exit(1)


def cmd_extreme(args: argparse.Namespace, config: Config) -> None:
    """
    Enumerate the extreme points of a problem's solution set.

    Args:
        args: Command line arguments.
        config: Configuration.
    """
    try:
        opts = solve_options(args, config)
        problem = load_problem(args.problem)
        solutions = enumerate_extreme_points(problem, max_support=args.max_support, opts=opts)
        _emit(dumps_solutions(solutions), args.out)
        logger.info(f"Wrote {len(solutions)} extreme points")

    except SOLVER_ERRORS as e:
        logger.error(f"Error enumerating extreme points: {e}")
        sys.exit(2)
    except (OSError, ValueError) as e:
        logger.error(f"Error reading problem: {e}")
        sys.exit(1)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="bv-sampling", description='Sampling functionals and spline solvers on GBV spaces')
    subparsers = parser.add_subparsers(dest='command', help='Command to execute')

    solve_parser = subparsers.add_parser('solve', help='Solve a problem file')
    solve_parser.add_argument('problem', type=str, help='Problem JSON document')
    solve_parser.add_argument('--oracle-step', type=float, help='Solve on a uniform knot grid of this pitch instead')
    solve_parser.add_argument('--tol', type=float, help='Solver tolerance (defaults to config)')
    solve_parser.add_argument('--max-iter', type=int, help='Iteration cap (defaults to config)')
    solve_parser.add_argument('--seed', type=int, help='Seed recorded in the report (defaults to config)')
    solve_parser.add_argument('--out', type=str, help='Solution JSON output path (defaults to stdout)')
    solve_parser.add_argument('--csv', type=str, help='Trace table CSV output path')
    solve_parser.add_argument('--lambda-grid', type=str, help='Comma-separated lambda values to solve for')
    solve_parser.add_argument('--allow-ill-posed', action='store_true', help='Override a failed well-posedness check')

    eval_parser = subparsers.add_parser('eval', help='Evaluate traces of a spline document')
    eval_parser.add_argument('spline', type=str, help='Spline JSON document')
    eval_parser.add_argument('--at', type=str, action='append', required=True,
                             help='Trace query t:side:d (repeatable; negative t such as -1:plus:0 is accepted)')

    check_parser = subparsers.add_parser('check', help='Run the invariant suite')
    check_parser.add_argument('--seed', type=int, help='Base seed (defaults to config)')
    check_parser.add_argument('--cases', type=int, default=100, help='Cases per invariant')

    demo_parser = subparsers.add_parser('demo-weakstar', help='Write the weak* counterexample table')
    demo_parser.add_argument('--n-max', type=int, default=10, help='Largest sequence index')
    demo_parser.add_argument('--out', type=str, help='CSV output path (defaults to stdout)')

    extreme_parser = subparsers.add_parser('extreme-points', help='Enumerate extreme points of the solution set')
    extreme_parser.add_argument('problem', type=str, help='Problem JSON document')
    extreme_parser.add_argument('--max-support', type=int, help='Largest support size (defaults to M)')
    extreme_parser.add_argument('--out', type=str, help='JSON output path (defaults to stdout)')
    return parser


def attach_negative_queries(argv: Sequence[str]) -> List[str]:
    """Rewrite `--at -1:plus:0` as `--at=-1:plus:0` so argparse does not read the query as an option."""
    attached: List[str] = []
    for token in argv:
        if attached and attached[-1] == "--at" and NEGATIVE_QUERY.match(token):
            attached[-1] = f"--at={token}"
        else:
            attached.append(token)
    return attached


# Invariants of the command-line surface

class TraceTableCase(NamedTuple):
    problem: Problem
    spline: PolySpline


@st.composite
def _trace_table_cases(draw: Callable) -> TraceTableCase:
    problem = draw(top_order_problems(orders=st.just(1)))
    knots_at = st.one_of(st.sampled_from(problem.abscissae), reals(-2.0, 3.0))
    spline = draw(splines(1, -2.0, 3.0))
    extra = draw(st.lists(st.tuples(knots_at, st.sampled_from((-1.5, 0.5, 2.0))), max_size=2))
    return TraceTableCase(problem, spline + PolySpline.build(1, [0.0], extra))


def _check_trace_table_jumps(case: TraceTableCase, opts: SolveOptions) -> Optional[str]:
    rows = list(csv.DictReader(io.StringIO(trace_table(case.problem, case.spline))))
    expected_rows = TRACE_ROWS + len(case.problem.abscissae) + case.spline.knot_count
    if len(rows) != expected_rows:
        return f"trace table has {len(rows)} rows, expected {expected_rows}"
    measure = derivative_measure(case.spline)
    scale = max(1.0, tv_norm(measure), *(abs(b) for b in case.spline.null_coeffs))
    for row in rows:
        t = float(row["t"])
        jump = float(row["f_plus"]) - float(row["f_minus"])
        if abs(jump - measure.weight_at(t)) > 1e-12 * scale:
            return f"f_plus - f_minus = {jump} at t = {t}, knot weight is {measure.weight_at(t)}"
    return None


class CommandRun(NamedTuple):
    command: str
    document: str
    problem: Problem
    flags: Tuple[Tuple[str, ...], ...]


COMMAND_FLAGS = {
    "solve": (("--tol", "1e-9"), ("--tol", "0"), ("--max-iter", "1"), ("--max-iter", "x"),
              ("--oracle-step", "0.5"), ("--oracle-step", "-1"), ("--lambda-grid", "0.1,0.5"),
              ("--lambda-grid", "x"), ("--allow-ill-posed",), ("--bogus",)),
    "eval": (("--at", "0:plus:0"), ("--at", "-1:minus:0"), ("--at", "0:left:0"), ("--at", "0:plus:9"),
             ("--at", "x")),
    "demo-weakstar": (("--n-max", "3"), ("--n-max", "0"), ("--n-max", "x")),
    "extreme-points": (("--max-support", "1"), ("--max-support", "0"), ("--max-support", "x")),
    "bogus": (("--help",),),
}


@st.composite
def _command_runs(draw: Callable) -> CommandRun:
    command = draw(st.sampled_from(sorted(COMMAND_FLAGS)))
    problem = draw(top_order_problems(orders=st.integers(1, 2), sizes=st.integers(1, 3)))
    flags = draw(st.lists(st.sampled_from(COMMAND_FLAGS[command]), max_size=3, unique=True))
    return CommandRun(command, draw(st.sampled_from(("valid", "malformed", "missing"))), problem, tuple(flags))


def exit_status(argv: Sequence[str]) -> int:
    """Run the CLI in-process with output and logging silenced, returning its exit status."""
    logging.disable(logging.CRITICAL)
    try:
        with redirect_stdout(io.StringIO()), redirect_stderr(io.StringIO()):
            main(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else (0 if e.code is None else 1)
    finally:
        logging.disable(logging.NOTSET)
    return 0


def _check_exit_status(run: CommandRun, opts: SolveOptions) -> Optional[str]:
    with tempfile.TemporaryDirectory() as workdir:
        path = Path(workdir) / "input.json"
        if run.document == "valid":
            if run.command == "eval":
                path.write_text(dumps_spline(PolySpline.green(run.problem.order)))
            else:
                path.write_text(dumps_problem(run.problem))
        elif run.document == "malformed":
            path.write_text("{")
        argv = [run.command]
        if run.command in ("solve", "eval", "extreme-points"):
            argv.append(str(path))
        if run.command == "demo-weakstar":
            argv += ["--out", str(Path(workdir) / "weakstar.csv")]
        for flag in run.flags:
            argv.extend(flag)
        if run.command == "eval" and not any(flag[0] == "--at" for flag in run.flags):
            argv += ["--at", "0:plus:0"]
        status = exit_status(argv)
    if status not in EXIT_STATUSES:
        return f"{argv} exited with {status}"
    if run.document != "valid" and run.command in ("solve", "eval", "extreme-points") and status != 1:
        return f"{argv} on a {run.document} document exited with {status}, expected 1"
    return None


CLI_INVARIANTS: Tuple[Invariant, ...] = (
    Invariant("trace table jumps", _trace_table_cases(), _check_trace_table_jumps, max_cases=20),
    Invariant("exit-status contract", _command_runs(), _check_exit_status, max_cases=30),
)


def main(argv: Optional[Sequence[str]] = None) -> None:
    """Main entry point for the CLI."""
    parser = build_parser()
    args = parser.parse_args(attach_negative_queries(sys.argv[1:] if argv is None else argv))
    # Command-line flags take precedence over the environment
    config = Config(tol=getattr(args, "tol", None),
                    max_iter=getattr(args, "max_iter", None),
                    seed=getattr(args, "seed", None))
    configure_logging(config)

    commands = {
        'solve': cmd_solve,
        'eval': cmd_eval,
        'check': cmd_check,
        'demo-weakstar': cmd_demo_weakstar,
        'extreme-points': cmd_extreme,
    }
    command = commands.get(args.command)
    if command is None:
        parser.print_help()
        sys.exit(1)
    try:
        command(args, config)
    except Exception as e:
        logger.error(f"Unexpected error in {args.command}: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
