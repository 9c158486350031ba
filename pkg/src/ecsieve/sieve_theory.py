"""Greaves weighted-sieve and Selberg upper-bound constants.

All functions are pure numerics. The parameter point used throughout is
U = 5/8, V = 1/4, xi = 2(1 - theta)(1 - eps)/5, r = r(theta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable

from .arith import factorize, primes_in_range
from .gl2 import density_C_prime
from .quadrature import adaptive_simpson

V0 = 0.074368
ROUNDED_LOWER_CONSTANT = 1.323
TRUNCATED_LOWER_CONSTANT = 1.32303
DEFAULT_U = 0.625
DEFAULT_V = 0.25
DEFAULT_EPS = 1e-3
QUAD_TOL = 1e-10


class OutOfRange(ValueError):
    pass


def _as_fraction(theta) -> Fraction:
    if isinstance(theta, Fraction):
        return theta
    if isinstance(theta, int):
        return Fraction(theta)
    # denominators up to 10^6 so that e.g. float(11/21) maps back to 11/21
    return Fraction(theta).limit_denominator(10**6)


def r_of_theta(theta) -> int:
    """[(18 + 2 theta) / (5 (1 - theta))] + 1, evaluated in exact rationals."""
    th = _as_fraction(theta)
    if not Fraction(1, 2) <= th < 1:
        raise OutOfRange(f"theta must lie in [1/2, 1), got {theta}")
    return math.floor((18 + 2 * th) / (5 * (1 - th))) + 1


def default_xi(theta, eps: float = DEFAULT_EPS) -> float:
    return 2.0 * (1.0 - float(theta)) * (1.0 - eps) / 5.0


@dataclass(frozen=True)
class SieveParams:
    theta: float = 0.5
    epsilon: float = DEFAULT_EPS
    xi: float | None = None
    U: float = DEFAULT_U
    V: float = DEFAULT_V
    D: float | None = None
    r: int | None = None

    def __post_init__(self):
        if self.xi is None:
            object.__setattr__(self, "xi", default_xi(self.theta, self.epsilon))
        if self.r is None:
            object.__setattr__(self, "r", r_of_theta(self.theta))

    def at(self, x: float) -> "SieveParams":
        """Copy with the level D = x^xi fixed."""
        return replace(self, D=float(x) ** self.xi)


def check_conditions(params: SieveParams) -> list[str]:
    """Names of the violated admissibility conditions; empty means admissible."""
    p = params
    out = []
    if not 0.5 <= float(p.theta) < 1:
        out.append("1/2 <= theta < 1")
    if not p.epsilon > 0:
        out.append("epsilon > 0")
    if not p.V >= V0:
        out.append("V >= V0")
    if not p.V <= 0.25:
        out.append("V <= 1/4")
    if not p.U >= 0.5:
        out.append("U >= 1/2")
    if not p.U < 1:
        out.append("U < 1")
    if not p.U + 3 * p.V >= 1:
        out.append("U + 3V >= 1")
    if not p.xi * (p.r * p.U + p.V) > 1:
        out.append("xi(rU + V) > 1")
    if not p.V >= 1 / 6:
        out.append("V >= 1/6 (alpha/beta domain)")
    if p.D is not None and not p.D > 1:
        out.append("D > 1")
    return out


def weight_W(p: int, params: SieveParams) -> float:
    """Greaves' logarithmic prime weight, zero outside [D^V, D^U)."""
    D = params.D
    if D is None or D <= 1:
        raise OutOfRange("weight_W needs a level D > 1")
    s = math.log(p) / math.log(D)
    if params.V <= s < params.U:
        return (s - params.V) / (params.U - params.V)
    return 0.0


def weight_G(n: int | Iterable[int], params: SieveParams,
             sieve_primes: Callable[[int], bool] = lambda p: True) -> float:
    """{1 - sum_{p | n, p in P} (1 - W(p))}^+.

    ``n`` may be an integer or an iterable of its distinct prime divisors.
    """
    if isinstance(n, int):
        primes = factorize(n).primes
    else:
        primes = n
    total = 1.0 - math.fsum(1.0 - weight_W(q, params) for q in primes if sieve_primes(q))
    return max(0.0, total)


def _check_V(V: float) -> None:
    if not 1 / 6 - 1e-15 <= V <= 0.25 + 1e-15:
        raise OutOfRange(f"alpha/beta need 1/6 <= V <= 1/4, got {V}")


def alpha_integrand(u: float, V: float) -> float:
    return ((2.0 / u) * math.log(2.0 - u * V) + math.log((1.0 - 1.0 / u) / (1.0 - V))) \
        * math.log(u - 3.0) / (u - 2.0)


def beta_integrand(u: float, V: float) -> float:
    return (math.log(2.0 - u * V) + math.log((1.0 - 1.0 / u) / (1.0 - V))) \
        * math.log(u - 3.0) / (u - 2.0)


def alpha(V: float, tol: float = QUAD_TOL) -> float:
    _check_V(V)
    integral = adaptive_simpson(lambda u: alpha_integrand(u, V), 4.0, 1.0 / V, tol)
    return math.log((1.0 - V) / 0.75) - integral


def beta(V: float, tol: float = QUAD_TOL) -> float:
    _check_V(V)
    integral = adaptive_simpson(lambda u: beta_integrand(u, V), 4.0, 1.0 / V, tol)
    return math.log((1.0 - V) / (3.0 * V)) - integral


def J_numerator(U: float, V: float) -> float:
    return (alpha(V) - V * beta(V) - V * math.log(3.0) - U * math.log(U)
            - (1.0 - U) * math.log(1.0 - U) - math.log(4.0 / 3.0))


def J(xi: float, U: float, V: float) -> float:
    if not xi > 0:
        raise OutOfRange("xi must be positive")
    if not U > V:
        raise OutOfRange("need U > V")
    return J_numerator(U, V) / (xi * (U - V))


def lower_bound_constant(theta) -> float:
    """2 J(2(1 - theta)/5, 5/8, 1/4): the Greaves lower-bound constant."""
    th = float(theta)
    if not 0.5 <= th < 1:
        raise OutOfRange(f"theta must lie in [1/2, 1), got {theta}")
    return 2.0 * J(2.0 * (1.0 - th) / 5.0, DEFAULT_U, DEFAULT_V)


def rounded_floor(theta) -> float:
    """Lower constant with 2J(1 - theta) rounded down to 1.323."""
    return ROUNDED_LOWER_CONSTANT / (1.0 - float(theta))


def upper_bound_constant(theta, epsilon: float) -> float:
    """5/(1 - theta) + eps.

    The Selberg bound X V(D^{1/2}) F(2) with F(2) = e^gamma and
    V(D^{1/2}) ~ 2 e^-gamma / log D gives 2/xi per unit of
    C x/(log x)^2; xi -> 2(1 - theta)/5 turns 2/xi into 5/(1 - theta).
    """
    th = float(theta)
    if not 0.5 <= th < 1:
        raise OutOfRange(f"theta must lie in [1/2, 1), got {theta}")
    if not epsilon > 0:
        raise OutOfRange("epsilon must be positive")
    return 5.0 / (1.0 - th) + epsilon


def omega1_probe(D: float, excluded: Iterable[int] = ()) -> float:
    """sup over dyadic [z1, z2) in [2, D] of |sum (w(l)/l) log l - log(z2/z1)|.

    w(l)/l = |C(l)|/|G(l)|; primes in ``excluded`` (those dividing M_E) are
    left out of the sieving set.
    """
    if D < 2:
        return 0.0
    skip = set(excluded)
    edges = [2.0]
    while edges[-1] * 2 <= D:
        edges.append(edges[-1] * 2)
    if edges[-1] < D:
        edges.append(float(D))
    primes = [l for l in primes_in_range(2, int(D) + 1) if l not in skip]
    contrib = [(l, float(density_C_prime(l)) * math.log(l)) for l in primes]
    sup = 0.0
    for i in range(len(edges)):
        for j in range(i + 1, len(edges)):
            z1, z2 = edges[i], edges[j]
            s = math.fsum(c for l, c in contrib if z1 <= l < z2)
            sup = max(sup, abs(s - math.log(z2 / z1)))
    return sup


@dataclass(frozen=True)
class BoundsTable:
    theta: float
    epsilon: float
    r: int
    xi: float
    U: float
    V: float
    lower_constant: float
    rounded_floor: float
    upper_constant: float
    below_truncated_constant: bool
    conditions: list[str] = field(default_factory=list)


def bounds_table(theta=0.5, epsilon: float = DEFAULT_EPS) -> BoundsTable:
    params = SieveParams(theta=float(theta), epsilon=epsilon, r=r_of_theta(theta))
    lower = lower_bound_constant(theta)
    return BoundsTable(
        theta=float(theta), epsilon=epsilon, r=params.r, xi=params.xi,
        U=params.U, V=params.V, lower_constant=lower,
        rounded_floor=rounded_floor(theta),
        upper_constant=upper_bound_constant(theta, epsilon),
        below_truncated_constant=lower * (1.0 - float(theta)) < TRUNCATED_LOWER_CONSTANT,
        conditions=check_conditions(params),
    )
