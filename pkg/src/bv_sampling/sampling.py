"""Generalized sampling functionals D^d delta_t^+- and measurement operators built from them."""
import logging
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence, Tuple, Union

from .exceptions import OrderMismatchError
from .gbv_core import PolySpline, check_order, derivative_measure, eval_trace, generalized_trace, null_jet
from .measures import PiecewiseLinearTestFunction, Side, pair_continuous
from .systems import FundamentalSystem, kernel_sup

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SamplingFunctional:
    """One-sided trace of the d-th derivative at t, for splines of order N."""

    t: float
    side: Side
    d: int
    order: int

    def __post_init__(self) -> None:
        order = check_order(self.order)
        if isinstance(self.d, bool) or int(self.d) != self.d or not 0 <= self.d <= order - 1:
            raise ValueError(f"Derivative order d must lie in [0, {order - 1}], got {self.d}")
        if not math.isfinite(self.t):
            raise ValueError(f"Sampling abscissa must be finite, got {self.t}")
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "side", Side.parse(self.side))
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "order", order)

    @property
    def is_top_order(self) -> bool:
        return self.d == self.order - 1

    def __call__(self, f: PolySpline) -> float:
        if f.order != self.order:
            raise OrderMismatchError(f"Functional of order {self.order} applied to spline of order {f.order}")
        return generalized_trace(f, self.t, self.side, self.d)

    def __str__(self) -> str:
        sign = "+" if self.side is Side.PLUS else "-"
        prefix = f"D^{self.d} " if self.d else ""
        return f"{prefix}delta_{self.t:g}^{sign}"


Term = Tuple[float, SamplingFunctional]


@dataclass(frozen=True)
class Measurement:
    """Finite linear combination sum_i c_i D^{d_i} delta_{t_i}^{side_i} sharing one order N."""

    terms: Tuple[Term, ...]

    def __post_init__(self) -> None:
        terms = tuple((float(c), functional) for c, functional in self.terms)
        if not terms:
            raise ValueError("A measurement needs at least one term")
        for c, _ in terms:
            if c == 0.0 or not math.isfinite(c):
                raise ValueError(f"Measurement coefficients must be finite and nonzero, got {c}")
        orders = {functional.order for _, functional in terms}
        if len(orders) != 1:
            raise OrderMismatchError(f"Measurement terms mix orders {sorted(orders)}")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def single(cls,
               t: float,
               side: Union[str, Side] = Side.PLUS,
               d: int = 0,
               order: int = 1,
               coefficient: float = 1.0) -> "Measurement":
        return cls(((coefficient, SamplingFunctional(t, Side.parse(side), d, order)),))

    @classmethod
    def combination(cls,
                    order: int,
                    terms: Iterable[Tuple[float, float, Union[str, Side], int]]) -> "Measurement":
        """Measurement from (c, t, side, d) tuples."""
        return cls(tuple((c, SamplingFunctional(t, Side.parse(side), d, order)) for c, t, side, d in terms))

    @property
    def order(self) -> int:
        return self.terms[0][1].order

    @property
    def is_top_order(self) -> bool:
        return all(functional.is_top_order for _, functional in self.terms)

    @property
    def abscissae(self) -> Tuple[float, ...]:
        return tuple(functional.t for _, functional in self.terms)

    def key(self) -> Tuple[Tuple[float, float, str, int], ...]:
        """Hashable description used to spot duplicate measurements."""
        return tuple((c, f.t, f.side.value, f.d) for c, f in self.terms)

    def __str__(self) -> str:
        return " + ".join(f"{c:g}*{functional}" for c, functional in self.terms)


def apply(m: Measurement, f: PolySpline) -> float:
    """
    Apply a measurement to a spline.

    Args:
        m (Measurement): The measurement.
        f (PolySpline): The spline.

    Returns:
        float: sum_i c_i D^{d_i} f(t_i^{side_i}).

    Raises:
        OrderMismatchError: If the orders differ.
    """
    if f.order != m.order:
        raise OrderMismatchError(f"Measurement of order {m.order} applied to spline of order {f.order}")
    return math.fsum(c * functional(f) for c, functional in m.terms)


def apply_all(measurements: Sequence[Measurement], f: PolySpline) -> Tuple[float, ...]:
    """The measurement operator nu(f) for a sequence of measurements."""
    return tuple(apply(m, f) for m in measurements)


def term_bound(functional: SamplingFunctional, system: FundamentalSystem) -> float:
    """Constant C_i with |functional(f)| <= C_i ||f||_GBV."""
    t, d = functional.t, functional.d
    basis = max(abs(system.basis_derivative(j, t, d)) for j in range(d, system.order))
    return max(kernel_sup(system, t, d), basis)


def continuity_bound(m: Measurement, system: FundamentalSystem) -> float:
    """
    Constant C with |apply(m, f)| <= C ||f||_GBV for every spline f.

    Args:
        m (Measurement): The measurement.
        system (FundamentalSystem): System defining the GBV norm.

    Returns:
        float: sum_i |c_i| C_i. It equals the sum of |c_i| when every term has d = N-1,
        and is an upper bound (not necessarily sharp) otherwise.

    Raises:
        OrderMismatchError: If the orders differ.
    """
    if m.order != system.order:
        raise OrderMismatchError(f"Measurement of order {m.order} does not match system of order {system.order}")
    return math.fsum(abs(c) * term_bound(functional, system) for c, functional in m.terms)


class WeakStarSample(NamedTuple):
    pairing: float
    trace: float
    jet: Tuple[float, ...]


def weakstar_sequence_member(n: int) -> PolySpline:
    """f_n = u - u(. - 1/n)."""
    return PolySpline.build(1, [0.0], [(0.0, 1.0), (1.0 / n, -1.0)])


def weakstar_counterexample(n: int,
                            g: PiecewiseLinearTestFunction,
                            system: FundamentalSystem) -> WeakStarSample:
    """
    Sample the sequence f_n = u - u(. - 1/n) against a test function, the trace at 0 and the jet.

    The pairing tends to 0 while the right trace at 0 stays at 1.

    Args:
        n (int): Index n >= 1.
        g (PiecewiseLinearTestFunction): Continuous test function.
        system (FundamentalSystem): Order-1 system anchored at or left of -1.

    Returns:
        WeakStarSample: (pairing, trace, jet).

    Raises:
        ValueError: If n < 1 or the system is not an order-1 system anchored at or left of -1.
    """
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if system.order != 1 or system.anchor > -1:
        raise ValueError(f"Expected an order-1 system anchored at or left of -1, got {system}")
    f_n = weakstar_sequence_member(int(n))
    return WeakStarSample(pairing=pair_continuous(g, derivative_measure(f_n)),
                          trace=eval_trace(f_n, 0.0, Side.PLUS),
                          jet=null_jet(f_n, system))
