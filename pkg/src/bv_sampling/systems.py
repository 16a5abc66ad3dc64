"""Fundamental bi-orthogonal systems and the canonical local right-inverse of D^N.

The system of an interval K = [a, b] is anchored at its left endpoint:

    p_j(t) = (t - a)^j / j!,        phi_j = D^j delta_a^+     (j < N)

and the right-inverse has the kernel

    g(t, tau) = u_N(t - tau) - sum_j p_j(t) u_{N-j}(a - tau),

which reduces to u_N(t - tau) for tau > a.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Sequence

from .exceptions import LocalityError, OrderMismatchError
from .gbv_core import PolySpline, check_order, generalized_trace, greens, null_jet
from .measures import Interval, Side, SignedMeasure

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FundamentalSystem:
    """Causal, left-anchored fundamental system of order N over an interval K = [a, b]."""

    order: int
    interval: Interval

    def __post_init__(self) -> None:
        object.__setattr__(self, "order", check_order(self.order))
        if not math.isfinite(self.interval.left) or not self.interval.left_closed:
            raise ValueError(f"System interval must have a finite, closed left endpoint, got {self.interval}")
        if self.interval.left == self.interval.right:
            raise ValueError(f"System interval {self.interval} is degenerate")

    @classmethod
    def on(cls, order: int, a: float, b: float = math.inf) -> "FundamentalSystem":
        """System over [a, b] (or [a, +inf) when b is infinite)."""
        return cls(order, Interval(a, b, True, math.isfinite(b)))

    @classmethod
    def default_for(cls, order: int, abscissae: Sequence[float]) -> "FundamentalSystem":
        """Default system over [min(abscissae) - 1, +inf)."""
        if not abscissae:
            raise ValueError("At least one abscissa is needed to default a system")
        return cls.on(order, min(abscissae) - 1.0)

    @property
    def anchor(self) -> float:
        return self.interval.left

    def restrict(self, interval: Interval) -> "FundamentalSystem":
        """
        System of a nested interval K' contained in K.

        Args:
            interval (Interval): The nested interval.

        Returns:
            FundamentalSystem: The system anchored at the left endpoint of K'.

        Raises:
            LocalityError: If K' is not contained in K.
        """
        outer = self.interval
        right_ok = interval.right < outer.right or (
            interval.right == outer.right and (outer.right_closed or not interval.right_closed))
        if not (outer.contains(interval.left) and right_ok):
            raise LocalityError(f"Interval {interval} is not nested in {self.interval}")
        return FundamentalSystem(self.order, interval)

    def basis_derivative(self, j: int, t: float, d: int = 0) -> float:
        """D^d p_j(t) = (t - a)^(j-d) / (j-d)! for j >= d, else 0."""
        if j < d:
            return 0.0
        return (t - self.anchor) ** (j - d) / math.factorial(j - d)

    def basis_spline(self, j: int) -> PolySpline:
        """p_j written in the t^i/i! basis of PolySpline."""
        if not 0 <= j < self.order:
            raise ValueError(f"Basis index must lie in [0, {self.order - 1}], got {j}")
        coeffs = [(-self.anchor) ** (j - i) / math.factorial(j - i) if i <= j else 0.0
                  for i in range(self.order)]
        return PolySpline.build(self.order, coeffs)

    def dual(self, j: int, f: PolySpline) -> float:
        """<phi_j, f> = right trace of D^j f at the anchor."""
        if f.order != self.order:
            raise OrderMismatchError(f"Spline of order {f.order} does not match system of order {self.order}")
        return generalized_trace(f, self.anchor, Side.PLUS, j)

    def biorthogonality_matrix(self) -> List[List[float]]:
        """[<phi_i, p_j>] evaluated from the closed form of p_j."""
        return [[self.basis_derivative(j, self.anchor, i) for j in range(self.order)]
                for i in range(self.order)]

    def polynomial_from_jet(self, jet: Sequence[float]) -> PolySpline:
        """sum_j jet_j p_j as a knot-free PolySpline."""
        if len(jet) != self.order:
            raise ValueError(f"Expected a jet of length {self.order}, got {len(jet)}")
        coeffs = [math.fsum(jet[j] * (-self.anchor) ** (j - i) / math.factorial(j - i)
                            for j in range(i, self.order)) + 0.0
                  for i in range(self.order)]
        return PolySpline(self.order, tuple(coeffs))


def project_null(f: PolySpline, system: FundamentalSystem) -> PolySpline:
    """
    Null-space projector P f = sum_j <phi_j, f> p_j.

    Args:
        f (PolySpline): The spline.
        system (FundamentalSystem): The fundamental system.

    Returns:
        PolySpline: A knot-free spline. Knot-free input is already in the null space and is returned as is.

    Raises:
        OrderMismatchError: If the orders differ.
    """
    jet = null_jet(f, system)
    if not f.knots:
        return f
    return system.polynomial_from_jet(jet)


def right_inverse(mu: SignedMeasure, system: FundamentalSystem) -> PolySpline:
    """
    Canonical right-inverse of D^N: the spline g with D^N g = mu and <phi_j, g> = 0.

    Args:
        mu (SignedMeasure): Purely atomic measure supported in K.
        system (FundamentalSystem): The fundamental system.

    Returns:
        PolySpline: g = sum_k w_k g(., tau_k) in spline form.

    Raises:
        ValueError: If mu has density pieces.
        LocalityError: If an atom lies outside K.
    """
    if not mu.is_atomic:
        raise ValueError("right_inverse only accepts purely atomic measures")
    outside = [x for x, _ in mu.atoms if not system.interval.contains(x)]
    if outside:
        raise LocalityError(f"Atoms at {outside} lie outside the system interval {system.interval}")
    order, anchor = system.order, system.anchor
    correction = [0.0 - math.fsum(w * greens(order - j, anchor - x, Side.PLUS) for x, w in mu.atoms)
                  for j in range(order)]
    polynomial = system.polynomial_from_jet(correction)
    return PolySpline(order, polynomial.null_coeffs, mu.atoms)


def kernel_derivative(system: FundamentalSystem, t: float, tau: float, side: Side, d: int) -> float:
    """
    Side trace in t of the d-th t-derivative of the right-inverse kernel.

    Args:
        system (FundamentalSystem): The fundamental system.
        t (float): Evaluation abscissa.
        tau (float): Source location.
        side (Side): Trace side of the leading Green's function term.
        d (int): Derivative order, 0 <= d <= N-1.

    Returns:
        float: u_{N-d}(t - tau) - sum_{j>=d} D^d p_j(t) u_{N-j}(a - tau).
    """
    order = system.order
    if not 0 <= d <= order - 1:
        raise ValueError(f"Derivative order d must lie in [0, {order - 1}], got {d}")
    correction = math.fsum(system.basis_derivative(j, t, d) * greens(order - j, system.anchor - tau, Side.PLUS)
                           for j in range(d, order))
    return greens(order - d, t - tau, side) - correction


def kernel(system: FundamentalSystem, t: float, tau: float, side: Side) -> float:
    """Right-inverse kernel g(t, tau); equals u_N(t - tau) whenever tau > a."""
    return kernel_derivative(system, t, tau, side, 0)


def kernel_sup(system: FundamentalSystem, t: float, d: int) -> float:
    """
    Upper bound of |D^d_t g(t, tau)| over all tau and both trace sides.

    The kernel vanishes unless tau lies between a and t, where it is a shifted
    monomial of degree N-1-d, so the bound is |t - a|^(N-1-d) / (N-1-d)!. For
    d = N-1 it is exactly 1.
    """
    degree = system.order - 1 - d
    if degree < 0:
        raise ValueError(f"Derivative order d must lie in [0, {system.order - 1}], got {d}")
    if degree == 0:
        return 1.0
    return abs(t - system.anchor) ** degree / math.factorial(degree)

