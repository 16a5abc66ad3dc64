"""Exact arithmetic on finite signed measures on the real line.

A measure is a finite list of atoms plus a piecewise-constant density. Both parts
are stored canonically (sorted, merged, no zero weights) so that equal measures
compare equal bit for bit.
"""
import bisect
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, List, Tuple, Union

logger = logging.getLogger(__name__)

Atom = Tuple[float, float]
DensityPiece = Tuple[float, float, float]


class Side(str, Enum):
    """Side of a one-sided limit: minus is the left trace, plus the right trace."""

    MINUS = "minus"
    PLUS = "plus"

    @classmethod
    def parse(cls, value: Union[str, "Side"]) -> "Side":
        """
        Parse a side from its name.

        Args:
            value (Union[str, Side]): "minus", "plus", "-", "+" or a Side.

        Returns:
            Side: The parsed side.

        Raises:
            ValueError: If the value names no side.
        """
        if isinstance(value, Side):
            return value
        aliases = {"minus": cls.MINUS, "-": cls.MINUS, "plus": cls.PLUS, "+": cls.PLUS}
        try:
            return aliases[str(value).strip().lower()]
        except KeyError:
            raise ValueError(f"Unknown side '{value}', expected 'minus' or 'plus'") from None


@dataclass(frozen=True)
class Interval:
    """Interval of the real line with explicit open/closed endpoint flags.

    Infinite endpoints are always open.
    """

    left: float
    right: float
    left_closed: bool = True
    right_closed: bool = True

    def __post_init__(self) -> None:
        left, right = float(self.left), float(self.right)
        if math.isnan(left) or math.isnan(right):
            raise ValueError("Interval endpoints must not be NaN")
        if left == math.inf or right == -math.inf:
            raise ValueError(f"Invalid interval endpoints ({left}, {right})")
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        if math.isinf(left):
            object.__setattr__(self, "left_closed", False)
        if math.isinf(right):
            object.__setattr__(self, "right_closed", False)
        if left > right or (left == right and not (self.left_closed and self.right_closed)):
            raise ValueError(f"Empty interval {self}")

    @classmethod
    def real_line(cls) -> "Interval":
        return cls(-math.inf, math.inf, False, False)

    @classmethod
    def closed(cls, left: float, right: float) -> "Interval":
        return cls(left, right, True, True)

    def contains(self, x: float) -> bool:
        """Whether x lies in the interval, respecting the endpoint flags."""
        if x < self.left or (x == self.left and not self.left_closed):
            return False
        if x > self.right or (x == self.right and not self.right_closed):
            return False
        return True

    def __str__(self) -> str:
        return f"{'[' if self.left_closed else '('}{self.left}, {self.right}{']' if self.right_closed else ')'}"


def merge_atoms(atoms: Iterable[Tuple[float, float]]) -> Tuple[Atom, ...]:
    grouped: Dict[float, List[float]] = defaultdict(list)
    for location, weight in atoms:
        grouped[float(location)].append(float(weight))
    merged = []
    for location in sorted(grouped):
        weight = math.fsum(grouped[location])
        if weight != 0.0:
            merged.append((location, weight))
    return tuple(merged)


def _merge_density(pieces: Iterable[Tuple[float, float, float]]) -> Tuple[DensityPiece, ...]:
    pieces = [(float(l), float(r), float(v)) for l, r, v in pieces]
    for l, r, _ in pieces:
        if not l < r:
            raise ValueError(f"Density piece [{l}, {r}) is empty")
    cuts = sorted({p for l, r, _ in pieces for p in (l, r)})
    merged: List[DensityPiece] = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        value = math.fsum(v for l, r, v in pieces if l <= lo and hi <= r)
        if value == 0.0:
            continue
        if merged and merged[-1][1] == lo and merged[-1][2] == value:
            merged[-1] = (merged[-1][0], hi, value)
        else:
            merged.append((lo, hi, value))
    return tuple(merged)


@dataclass(frozen=True)
class SignedMeasure:
    """Finite signed measure: atoms (location, weight) plus density pieces (l, r, value) on [l, r)."""

    atoms: Tuple[Atom, ...] = ()
    density: Tuple[DensityPiece, ...] = ()

    def __post_init__(self) -> None:
        atoms = tuple((float(x), float(w)) for x, w in self.atoms)
        density = tuple((float(l), float(r), float(v)) for l, r, v in self.density)
        for x, w in atoms:
            if not (math.isfinite(x) and math.isfinite(w)):
                raise ValueError(f"Atom ({x}, {w}) must be finite")
            if w == 0.0:
                raise ValueError(f"Atom at {x} has zero weight")
        for (x0, _), (x1, _) in zip(atoms[:-1], atoms[1:]):
            if not x0 < x1:
                raise ValueError(f"Atom locations must be strictly increasing, got {x0} then {x1}")
        for l, r, v in density:
            if not (math.isfinite(l) and math.isfinite(r) and math.isfinite(v)):
                raise ValueError(f"Density piece ({l}, {r}, {v}) must be finite")
            if not l < r:
                raise ValueError(f"Density piece [{l}, {r}) is empty")
        for (_, r0, _), (l1, _, _) in zip(density[:-1], density[1:]):
            if r0 > l1:
                raise ValueError(f"Density pieces must be sorted and disjoint, got overlap at {l1}")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "density", density)

    @classmethod
    def build(cls,
              atoms: Iterable[Tuple[float, float]] = (),
              density: Iterable[Tuple[float, float, float]] = ()) -> "SignedMeasure":
        """
        Build a measure in canonical form from arbitrary parts.

        Colliding atoms are summed, overlapping density pieces are added, and zero
        weights or values are dropped.

        Args:
            atoms (Iterable[Tuple[float, float]]): (location, weight) pairs in any order.
            density (Iterable[Tuple[float, float, float]]): (l, r, value) pieces, possibly overlapping.

        Returns:
            SignedMeasure: The canonical measure.
        """
        return cls(merge_atoms(atoms), _merge_density(density))

    @classmethod
    def zero(cls) -> "SignedMeasure":
        return cls()

    @classmethod
    def dirac(cls, location: float, weight: float = 1.0) -> "SignedMeasure":
        return cls.build(atoms=[(location, weight)])

    @property
    def is_zero(self) -> bool:
        return not self.atoms and not self.density

    @property
    def is_atomic(self) -> bool:
        return not self.density

    def weight_at(self, location: float) -> float:
        """Weight of the atom at `location`, 0 if there is none."""
        locations = [x for x, _ in self.atoms]
        i = bisect.bisect_left(locations, location)
        if i < len(locations) and locations[i] == location:
            return self.atoms[i][1]
        return 0.0

    def __add__(self, other: "SignedMeasure") -> "SignedMeasure":
        if not isinstance(other, SignedMeasure):
            return NotImplemented
        return SignedMeasure.build(self.atoms + other.atoms, self.density + other.density)

    def __neg__(self) -> "SignedMeasure":
        return self * -1.0

    def __sub__(self, other: "SignedMeasure") -> "SignedMeasure":
        if not isinstance(other, SignedMeasure):
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar: float) -> "SignedMeasure":
        scalar = float(scalar)
        return SignedMeasure.build([(x, scalar * w) for x, w in self.atoms],
                                   [(l, r, scalar * v) for l, r, v in self.density])

    __rmul__ = __mul__


@dataclass(frozen=True)
class PiecewiseLinearTestFunction:
    """Continuous piecewise-linear function, zero outside the hull of its breakpoints."""

    breakpoints: Tuple[float, ...]
    values: Tuple[float, ...]

    def __post_init__(self) -> None:
        breakpoints = tuple(float(x) for x in self.breakpoints)
        values = tuple(float(v) for v in self.values)
        if not breakpoints or len(breakpoints) != len(values):
            raise ValueError("Breakpoints and values must be nonempty and of equal length")
        if any(not math.isfinite(x) for x in breakpoints + values):
            raise ValueError("Breakpoints and values must be finite")
        if any(not x0 < x1 for x0, x1 in zip(breakpoints[:-1], breakpoints[1:])):
            raise ValueError("Breakpoints must be strictly increasing")
        if values[0] != 0.0 or values[-1] != 0.0:
            raise ValueError("Test function must vanish at the ends of its breakpoint hull to stay continuous")
        object.__setattr__(self, "breakpoints", breakpoints)
        object.__setattr__(self, "values", values)

    @classmethod
    def hat(cls, center: float = 0.0, half_width: float = 1.0) -> "PiecewiseLinearTestFunction":
        """Unit hat: 1 at `center`, 0 outside (center - half_width, center + half_width)."""
        if half_width <= 0:
            raise ValueError(f"half_width must be positive, got {half_width}")
        return cls((center - half_width, center, center + half_width), (0.0, 1.0, 0.0))

    def exact(self, x: float) -> Fraction:
        """Value at x in exact rational arithmetic."""
        bp = self.breakpoints
        if x <= bp[0] or x >= bp[-1]:
            return Fraction(0)
        i = bisect.bisect_right(bp, x) - 1
        x0, x1 = Fraction(bp[i]), Fraction(bp[i + 1])
        v0, v1 = Fraction(self.values[i]), Fraction(self.values[i + 1])
        return v0 + (v1 - v0) * (Fraction(x) - x0) / (x1 - x0)

    def __call__(self, x: float) -> float:
        return float(self.exact(x))

    def integral(self, left: float, right: float) -> Fraction:
        """Exact integral over [left, right)."""
        if not left < right:
            return Fraction(0)
        nodes = [left] + [x for x in self.breakpoints if left < x < right] + [right]
        total = Fraction(0)
        for x0, x1 in zip(nodes[:-1], nodes[1:]):
            total += (Fraction(x1) - Fraction(x0)) * (self.exact(x0) + self.exact(x1)) / 2
        return total

    def sup_norm(self) -> float:
        return max(abs(v) for v in self.values)


def tv_norm(mu: SignedMeasure) -> float:
    """
    Total-variation norm of a measure.

    Args:
        mu (SignedMeasure): The measure.

    Returns:
        float: Sum of absolute atom weights plus the absolute density mass.
    """
    return math.fsum([abs(w) for _, w in mu.atoms] + [abs(v) * (r - l) for l, r, v in mu.density])


def cumulative(mu: SignedMeasure, t: float, side: Side) -> float:
    """
    Cumulative distribution with a side convention.

    Args:
        mu (SignedMeasure): The measure.
        t (float): Abscissa.
        side (Side): MINUS gives mu((-inf, t)), PLUS gives mu((-inf, t]).

    Returns:
        float: The cumulative mass.
    """
    side = Side.parse(side)
    locations = [x for x, _ in mu.atoms]
    if side is Side.PLUS:
        count = bisect.bisect_right(locations, t)
    else:
        count = bisect.bisect_left(locations, t)
    terms = [w for _, w in mu.atoms[:count]]
    terms.extend(v * (min(r, t) - l) for l, r, v in mu.density if l < t)
    return math.fsum(terms)


def restrict(mu: SignedMeasure, interval: Interval) -> SignedMeasure:
    """
    Restrict a measure to an interval.

    Args:
        mu (SignedMeasure): The measure.
        interval (Interval): The interval K with its endpoint flags.

    Returns:
        SignedMeasure: Atoms inside K and density pieces clipped to K.
    """
    atoms = [(x, w) for x, w in mu.atoms if interval.contains(x)]
    density = []
    for l, r, v in mu.density:
        lo, hi = max(l, interval.left), min(r, interval.right)
        if lo < hi:
            density.append((lo, hi, v))
    return SignedMeasure(tuple(atoms), tuple(density))


def pair_continuous(g: PiecewiseLinearTestFunction, mu: SignedMeasure) -> float:
    """
    Pair a continuous piecewise-linear test function with a measure.

    The sum is accumulated exactly and rounded once.

    Args:
        g (PiecewiseLinearTestFunction): The test function.
        mu (SignedMeasure): The measure.

    Returns:
        float: sum_k w_k g(x_k) + sum_i v_i * integral of g over [l_i, r_i).
    """
    total = Fraction(0)
    for x, w in mu.atoms:
        total += Fraction(w) * g.exact(x)
    for l, r, v in mu.density:
        total += Fraction(v) * g.integral(l, r)
    return float(total)
