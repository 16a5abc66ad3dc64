"""JSON documents for problems, splines, measures and solutions.

Floats are written with the shortest repr that round-trips, so parsing a
serialized document gives back the same values bit for bit. The upper end of
the system interval K may be the string "inf".
"""
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .gbv_core import PolySpline
from .measures import Side
from .sampling import Measurement
from .solver import Loss, LossKind, Problem, Report, Solution
from .systems import FundamentalSystem

logger = logging.getLogger(__name__)

Bound = Union[float, Literal["inf"]]


class _Document(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class SplineDocument(_Document):
    order: int = Field(ge=1)
    null_coeffs: List[float]
    knots: List[Tuple[float, float]] = Field(default_factory=list)

    def to_spline(self) -> PolySpline:
        return PolySpline(self.order, tuple(self.null_coeffs), tuple(self.knots))

    @classmethod
    def from_spline(cls, f: PolySpline) -> "SplineDocument":
        return cls(order=f.order, null_coeffs=list(f.null_coeffs), knots=list(f.knots))


class TermDocument(_Document):
    c: float = 1.0
    t: float
    side: Side = Side.PLUS
    d: int = Field(default=0, ge=0)


class MeasurementDocument(_Document):
    terms: List[TermDocument] = Field(min_length=1)

    def to_measurement(self, order: int) -> Measurement:
        return Measurement.combination(order, [(term.c, term.t, term.side, term.d) for term in self.terms])

    @classmethod
    def from_measurement(cls, m: Measurement) -> "MeasurementDocument":
        return cls(terms=[TermDocument(c=c, t=f.t, side=f.side, d=f.d) for c, f in m.terms])


class LossDocument(_Document):
    kind: LossKind = LossKind.SQUARED
    weights: Optional[List[float]] = None

    def to_loss(self) -> Loss:
        return Loss(self.kind, None if self.weights is None else tuple(self.weights))

    @classmethod
    def from_loss(cls, loss: Loss) -> "LossDocument":
        return cls(kind=loss.kind, weights=None if loss.weights is None else list(loss.weights))


class ProblemDocument(_Document):
    order: int = Field(ge=1)
    K: Optional[Tuple[float, Bound]] = None
    measurements: List[MeasurementDocument] = Field(min_length=1)
    y: List[float]
    loss: LossDocument = Field(default_factory=LossDocument)
    lambda_: float = Field(default=1.0, alias="lambda")
    grid: Optional[List[float]] = None

    @model_validator(mode="after")
    def _lengths_agree(self) -> "ProblemDocument":
        if len(self.measurements) != len(self.y):
            raise ValueError(f"{len(self.measurements)} measurements but {len(self.y)} data values")
        return self

    def to_problem(self) -> Problem:
        system = None
        if self.K is not None:
            left, right = self.K
            system = FundamentalSystem.on(self.order, left, math.inf if right == "inf" else right)
        return Problem(order=self.order,
                       measurements=tuple(m.to_measurement(self.order) for m in self.measurements),
                       y=tuple(self.y),
                       loss=self.loss.to_loss(),
                       lam=self.lambda_,
                       system=system,
                       grid=None if self.grid is None else tuple(self.grid))

    @classmethod
    def from_problem(cls, problem: Problem) -> "ProblemDocument":
        interval = problem.system.interval
        right: Bound = "inf" if math.isinf(interval.right) else interval.right
        return cls(order=problem.order,
                   K=(interval.left, right),
                   measurements=[MeasurementDocument.from_measurement(m) for m in problem.measurements],
                   y=list(problem.y),
                   loss=LossDocument.from_loss(problem.loss),
                   lambda_=problem.lam,
                   grid=None if problem.grid is None else list(problem.grid))


class SolutionDocument(_Document):
    spline: SplineDocument
    cost: float
    knot_count: int = Field(ge=0)
    residuals: List[float]
    report: Dict[str, Any] = Field(default_factory=dict)

    def to_solution(self) -> Solution:
        return Solution(self.spline.to_spline(), self.cost, self.knot_count, tuple(self.residuals),
                        Report.from_dict(self.report))

    @classmethod
    def from_solution(cls, solution: Solution) -> "SolutionDocument":
        return cls(spline=SplineDocument.from_spline(solution.spline),
                   cost=solution.cost,
                   knot_count=solution.knot_count,
                   residuals=list(solution.residuals),
                   report=solution.report.to_dict())


def _dumps(payload: Any) -> str:
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def dumps_problem(problem: Problem) -> str:
    return _dumps(ProblemDocument.from_problem(problem).model_dump(mode="json", by_alias=True))


def dumps_spline(f: PolySpline) -> str:
    return _dumps(SplineDocument.from_spline(f).model_dump(mode="json"))


def dumps_solution(solution: Solution) -> str:
    """Serialize a solution; byte-identical for identical solutions."""
    return _dumps(SolutionDocument.from_solution(solution).model_dump(mode="json"))


def dumps_solutions(solutions: Sequence[Solution]) -> str:
    return _dumps([SolutionDocument.from_solution(s).model_dump(mode="json") for s in solutions])


def parse_problem(text: str) -> Problem:
    return ProblemDocument.model_validate_json(text).to_problem()


def parse_spline(text: str) -> PolySpline:
    return SplineDocument.model_validate_json(text).to_spline()


def parse_solution(text: str) -> Solution:
    return SolutionDocument.model_validate_json(text).to_solution()


def load_problem(path: Union[str, Path]) -> Problem:
    """
    Read and validate a problem document.

    Raises:
        OSError: If the file cannot be read.
        pydantic.ValidationError: If the document is malformed.
        ValueError: If the document describes an invalid problem.
    """
    text = Path(path).read_text(encoding="utf-8")
    problem = parse_problem(text)
    logger.debug(f"Loaded problem with {problem.size} measurements from {path}")
    return problem


def load_spline(path: Union[str, Path]) -> PolySpline:
    return parse_spline(Path(path).read_text(encoding="utf-8"))


def write_text(path: Union[str, Path], text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")
    logger.info(f"Wrote {path}")
