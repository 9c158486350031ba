"""Elliptic curves over Q, their reductions mod p, and |E(F_p)|."""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass

import numpy as np

from .arith import factorize

logger = logging.getLogger(__name__)

NAIVE_LIMIT = 10**4
BSGS_MIN_P = 229
BSGS_MAX_POINTS = 40


class SingularCurve(ValueError):
    pass


class BadReduction(ValueError):
    pass


@dataclass(frozen=True)
class CurveModel:
    """Long Weierstrass model y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6."""

    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    disc: int

    @property
    def coefficients(self) -> tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def b_invariants(self) -> tuple[int, int, int, int]:
        a1, a2, a3, a4, a6 = self.coefficients
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    @property
    def c_invariants(self) -> tuple[int, int]:
        b2, b4, b6, _ = self.b_invariants
        return b2 * b2 - 24 * b4, -b2**3 + 36 * b2 * b4 - 216 * b6

    def spec(self) -> str:
        return ",".join(str(a) for a in self.coefficients)


@dataclass(frozen=True)
class FrobeniusRecord:
    p: int
    np: int
    ap: int


def discriminant(a1: int, a2: int, a3: int, a4: int, a6: int) -> int:
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6


def make_curve(a1: int, a2: int, a3: int, a4: int, a6: int) -> CurveModel:
    coeffs = tuple(int(a) for a in (a1, a2, a3, a4, a6))
    disc = discriminant(*coeffs)
    if disc == 0:
        raise SingularCurve(f"singular model {coeffs}")
    return CurveModel(*coeffs, disc=disc)


def parse_curve(text: str) -> CurveModel:
    """Parse ``"a1,a2,a3,a4,a6"``."""
    parts = [s.strip() for s in text.split(",")]
    if len(parts) != 5:
        raise ValueError(f"curve needs five comma-separated integers, got {text!r}")
    return make_curve(*(int(s) for s in parts))


def _check_good(curve: CurveModel, p: int) -> None:
    if curve.disc % p == 0:
        raise BadReduction(f"p={p} divides the discriminant {curve.disc}")


def count_points_naive(curve: CurveModel, p: int) -> int:
    """Exhaustive count of projective points over F_p."""
    _check_good(curve, p)
    a1, a2, a3, a4, a6 = (a % p for a in curve.coefficients)
    if p == 2:
        n = 1
        for x in range(2):
            for y in range(2):
                if (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % 2 == 0:
                    n += 1
        return n
    # (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6 for odd p
    b2, b4, b6, _ = (b % p for b in curve.b_invariants)
    x = np.arange(p, dtype=np.int64)
    rhs = (((4 * x + b2) % p * x + 2 * b4) % p * x + b6) % p
    roots = np.zeros(p, dtype=np.int64)
    np.add.at(roots, x * x % p, 1)
    return 1 + int(roots[rhs].sum())


# --- short Weierstrass arithmetic over F_p, points as (x, y) or None ---

def _add(P, Q, A: int, p: int):
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return None
        lam = (3 * x1 * x1 + A) * pow(2 * y1, -1, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return (x3, (lam * (x1 - x3) - y1) % p)


def _neg(P, p: int):
    return None if P is None else (P[0], -P[1] % p)


def _mul(k: int, P, A: int, p: int):
    if k < 0:
        return _mul(-k, _neg(P, p), A, p)
    R = None
    while k:
        if k & 1:
            R = _add(R, P, A, p)
        k >>= 1
        if k:
            P = _add(P, P, A, p)
    return R


def _sqrt_mod(r: int, p: int) -> int:
    """Square root of a quadratic residue ``r`` modulo an odd prime (Tonelli-Shanks)."""
    if r == 0:
        return 0
    if p % 4 == 3:
        return pow(r, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, root = s, pow(z, q, p), pow(r, q, p), pow(r, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, root = t * c % p, root * b % p
    return root


def _random_point(A: int, B: int, p: int, rng: random.Random):
    while True:
        x = rng.randrange(p)
        r = (x * x * x + A * x + B) % p
        if r == 0:
            return (x, 0)
        if pow(r, (p - 1) // 2, p) == 1:
            y = _sqrt_mod(r, p)
            return (x, y if rng.getrandbits(1) else (-y) % p)


def _order_multiple(P, A: int, p: int, w: int) -> int:
    """Some N in [p+1-w, p+1+w] with N*P = O (baby-step giant-step)."""
    span = 2 * w
    m = math.isqrt(span) + 1
    baby = {}
    Q = None
    for j in range(m):
        baby.setdefault(Q, j)
        Q = _add(Q, P, A, p)
    step = _neg(Q, p)  # -(m P)
    top = p + 1 + w
    T = _mul(top, P, A, p)
    for i in range(m + 1):
        j = baby.get(T, -1)
        if j >= 0:
            return top - (i * m + j)
        T = _add(T, step, A, p)
    raise ArithmeticError(f"no multiple of the point order in the Hasse interval, p={p}")


def _point_order(P, N: int, A: int, p: int) -> int:
    for q, e in factorize(N).factors:
        for _ in range(e):
            if _mul(N // q, P, A, p) is None:
                N //= q
            else:
                break
    return N


def count_points_bsgs(curve: CurveModel, p: int) -> int:
    """|E(F_p)| via point orders located by baby-step giant-step in the Hasse interval.

    The lcm of the orders of random points divides the group order; the count
    is certified once a single multiple of that lcm lies in the interval.
    Falls back to exhaustive counting if 40 points do not separate it.
    """
    _check_good(curve, p)
    if p <= BSGS_MIN_P:
        raise ValueError(f"baby-step giant-step counting needs p > {BSGS_MIN_P}, got {p}")
    c4, c6 = curve.c_invariants
    A, B = (-27 * c4) % p, (-54 * c6) % p
    w = math.isqrt(4 * p)
    lo, hi = p + 1 - w, p + 1 + w
    rng = random.Random(f"bsgs:{p}:{A}:{B}")
    lcm = 1
    for _ in range(BSGS_MAX_POINTS):
        P = _random_point(A, B, p, rng)
        if P is None:
            continue
        n = _point_order(P, _order_multiple(P, A, p, w), A, p)
        lcm = lcm * n // math.gcd(lcm, n)
        first = -(-lo // lcm) * lcm
        if first + lcm > hi:
            return first
    logger.warning("point orders left the Hasse interval ambiguous for p=%d; counting exhaustively", p)
    return count_points_naive(curve, p)


def count_points(curve: CurveModel, p: int) -> int:
    if p < NAIVE_LIMIT:
        return count_points_naive(curve, p)
    return count_points_bsgs(curve, p)


def reduce_and_count(curve: CurveModel, p: int) -> FrobeniusRecord:
    n = count_points(curve, p)
    return FrobeniusRecord(p=p, np=n, ap=p + 1 - n)
