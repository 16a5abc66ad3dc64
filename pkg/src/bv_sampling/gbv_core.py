"""D^N-splines, the canonical representatives of generalized BV functions.

A spline of order N is

    f(t) = sum_j b_j t^j / j!  +  sum_k a_k (t - tau_k)_+^(N-1) / (N-1)!

so that D^N f = sum_k a_k delta_{tau_k}. Point values are only exposed through
left and right traces.
"""
import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Optional, Sequence, Tuple

from .exceptions import OrderMismatchError
from .measures import Side, SignedMeasure, merge_atoms, tv_norm

if TYPE_CHECKING:
    from .systems import FundamentalSystem

logger = logging.getLogger(__name__)

Knot = Tuple[float, float]


def check_order(order: int) -> int:
    if isinstance(order, bool) or int(order) != order or order < 1:
        raise ValueError(f"Order N must be an integer >= 1, got {order}")
    return int(order)


@dataclass(frozen=True)
class PolySpline:
    """D^N-spline: null-space polynomial in the t^j/j! basis plus weighted shifted Green's functions."""

    order: int
    null_coeffs: Tuple[float, ...]
    knots: Tuple[Knot, ...] = ()

    def __post_init__(self) -> None:
        order = check_order(self.order)
        null_coeffs = tuple(float(b) for b in self.null_coeffs)
        knots = tuple((float(x), float(w)) for x, w in self.knots)
        if len(null_coeffs) != order:
            raise ValueError(f"Expected {order} null-space coefficients, got {len(null_coeffs)}")
        if any(not math.isfinite(b) for b in null_coeffs):
            raise ValueError("Null-space coefficients must be finite")
        for x, w in knots:
            if not (math.isfinite(x) and math.isfinite(w)):
                raise ValueError(f"Knot ({x}, {w}) must be finite")
            if w == 0.0:
                raise ValueError(f"Knot at {x} has zero weight")
        for (x0, _), (x1, _) in zip(knots[:-1], knots[1:]):
            if not x0 < x1:
                raise ValueError(f"Knot locations must be strictly increasing, got {x0} then {x1}")
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "null_coeffs", null_coeffs)
        object.__setattr__(self, "knots", knots)

    @classmethod
    def build(cls,
              order: int,
              null_coeffs: Optional[Sequence[float]] = None,
              knots: Iterable[Tuple[float, float]] = ()) -> "PolySpline":
        """
        Build a spline in canonical form.

        Args:
            order (int): Differential order N >= 1.
            null_coeffs (Optional[Sequence[float]]): Coefficients b_0.. of t^j/j!, zero-padded to N.
            knots (Iterable[Tuple[float, float]]): (tau, weight) pairs in any order; colliding knots are merged.

        Returns:
            PolySpline: The canonical spline.
        """
        order = check_order(order)
        coeffs = list(null_coeffs or [])
        if len(coeffs) > order:
            raise ValueError(f"At most {order} null-space coefficients allowed, got {len(coeffs)}")
        coeffs.extend([0.0] * (order - len(coeffs)))
        return cls(order, tuple(coeffs), merge_atoms(knots))

    @classmethod
    def zero(cls, order: int) -> "PolySpline":
        return cls.build(order)

    @classmethod
    def polynomial(cls, order: int, coeffs: Sequence[float]) -> "PolySpline":
        return cls.build(order, coeffs)

    @classmethod
    def green(cls, order: int, tau: float = 0.0, weight: float = 1.0) -> "PolySpline":
        """Shifted causal Green's function weight * u_N(. - tau)."""
        return cls.build(order, knots=[(tau, weight)])

    @property
    def knot_count(self) -> int:
        return len(self.knots)

    @property
    def is_zero(self) -> bool:
        return not self.knots and all(b == 0.0 for b in self.null_coeffs)

    def _check_same_order(self, other: "PolySpline") -> None:
        if other.order != self.order:
            raise OrderMismatchError(f"Cannot combine splines of order {self.order} and {other.order}")

    def __add__(self, other: "PolySpline") -> "PolySpline":
        if not isinstance(other, PolySpline):
            return NotImplemented
        self._check_same_order(other)
        coeffs = [math.fsum(pair) for pair in zip(self.null_coeffs, other.null_coeffs)]
        return PolySpline.build(self.order, coeffs, self.knots + other.knots)

    def __neg__(self) -> "PolySpline":
        return self * -1.0

    def __sub__(self, other: "PolySpline") -> "PolySpline":
        if not isinstance(other, PolySpline):
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar: float) -> "PolySpline":
        scalar = float(scalar)
        return PolySpline.build(self.order,
                                [scalar * b for b in self.null_coeffs],
                                [(x, scalar * w) for x, w in self.knots])

    __rmul__ = __mul__


def greens(order: int, x: float, side: Side) -> float:
    """
    Side trace of the causal Green's function u_N(x) = x_+^(N-1) / (N-1)!.

    Args:
        order (int): N >= 1.
        x (float): Argument.
        side (Side): Trace side; only matters at x = 0 for N = 1.

    Returns:
        float: The trace value.

    Raises:
        ValueError: If N < 1.
    """
    order = check_order(order)
    side = Side.parse(side)
    if order == 1:
        if x > 0:
            return 1.0
        if x < 0:
            return 0.0
        return 1.0 if side is Side.PLUS else 0.0
    if x <= 0:
        return 0.0
    return x ** (order - 1) / math.factorial(order - 1)


def _polynomial_derivative(coeffs: Sequence[float], t: float, d: int) -> float:
    return math.fsum(b * t ** (j - d) / math.factorial(j - d) for j, b in enumerate(coeffs) if j >= d)


def generalized_trace(f: PolySpline, t: float, side: Side, d: int) -> float:
    """
    Side trace of the d-th derivative of a spline.

    Args:
        f (PolySpline): The spline.
        t (float): Abscissa.
        side (Side): Trace side.
        d (int): Derivative order, 0 <= d <= N-1.

    Returns:
        float: The trace of D^d f at t from the given side.

    Raises:
        ValueError: If d is outside [0, N-1].
    """
    if isinstance(d, bool) or int(d) != d or not 0 <= d <= f.order - 1:
        raise ValueError(f"Derivative order d must lie in [0, {f.order - 1}], got {d}")
    d = int(d)
    side = Side.parse(side)
    terms = [_polynomial_derivative(f.null_coeffs, t, d)]
    terms.extend(w * greens(f.order - d, t - x, side) for x, w in f.knots)
    return math.fsum(terms)


def eval_trace(f: PolySpline, t: float, side: Side) -> float:
    """
    Left or right trace f^-(t) / f^+(t) of a spline.

    Args:
        f (PolySpline): The spline.
        t (float): Abscissa.
        side (Side): Trace side.

    Returns:
        float: The one-sided limit of f at t.
    """
    return generalized_trace(f, t, side, 0)


def derivative_measure(f: PolySpline) -> SignedMeasure:
    """D^N f as a purely atomic measure; the null-space part contributes nothing."""
    return SignedMeasure(f.knots)


def null_jet(f: PolySpline, system: "FundamentalSystem") -> Tuple[float, ...]:
    """Dual functionals <phi_j, f> = D^j f(a^+) at the anchor a of the system, j < N."""
    if f.order != system.order:
        raise OrderMismatchError(f"Spline of order {f.order} does not match system of order {system.order}")
    return tuple(generalized_trace(f, system.anchor, Side.PLUS, j) for j in range(f.order))


def gbv_norm(f: PolySpline, system: "FundamentalSystem") -> float:
    """
    GBV norm ||D^N f||_M + sum_j |<phi_j, f>|.

    Args:
        f (PolySpline): The spline.
        system (FundamentalSystem): System supplying the dual functionals.

    Returns:
        float: The norm.

    Raises:
        OrderMismatchError: If the orders differ.
    """
    jet = null_jet(f, system)
    return tv_norm(derivative_measure(f)) + math.fsum(abs(c) for c in jet)
