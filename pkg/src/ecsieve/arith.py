"""Prime generation, 64-bit factorization and elementary arithmetic functions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

import numpy as np

from .quadrature import adaptive_simpson

INT63_MAX = 2**63 - 1
TRIAL_LIMIT = 10**5
SEGMENT = 1 << 18

# Deterministic for every n < 3.3e24, which covers the whole 64-bit range.
MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


@dataclass(frozen=True)
class FactoredInteger:
    """``n`` together with its prime factorization, primes ascending."""

    n: int
    factors: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        prod = 1
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise ValueError(f"malformed factorization of {self.n}: {self.factors}")
            last = p
            prod *= p**e
        if prod != self.n:
            raise ValueError(f"factors of {self.n} multiply to {prod}")

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    @property
    def big_omega(self) -> int:
        return sum(e for _, e in self.factors)

    @property
    def little_omega(self) -> int:
        return len(self.factors)

    def radical(self) -> int:
        return math.prod(self.primes)


def _simple_sieve(limit: int) -> np.ndarray:
    """Primes ``< limit`` as an int64 array."""
    if limit <= 2:
        return np.zeros(0, dtype=np.int64)
    is_p = np.ones(limit, dtype=bool)
    is_p[:2] = False
    is_p[4::2] = False
    for q in range(3, math.isqrt(limit - 1) + 1, 2):
        if is_p[q]:
            is_p[q * q::2 * q] = False
    return np.flatnonzero(is_p).astype(np.int64)


@lru_cache(maxsize=8)
def _base_primes(limit: int) -> np.ndarray:
    return _simple_sieve(limit)


def iter_prime_segments(lo: int, hi: int, segment: int = SEGMENT) -> Iterator[np.ndarray]:
    """Yield the primes of ``[lo, hi)`` as consecutive ascending int64 arrays.

    Memory is O(sqrt(hi) + segment).
    """
    if not 0 <= lo <= hi <= INT63_MAX:
        raise ValueError(f"need 0 <= lo <= hi <= 2^63-1, got [{lo}, {hi})")
    lo = max(lo, 2)
    if lo >= hi:
        return
    base = _base_primes(math.isqrt(hi - 1) + 1)
    start = lo
    while start < hi:
        stop = min(start + segment, hi)
        mark = np.ones(stop - start, dtype=bool)
        for q in base:
            q = int(q)
            qq = q * q
            if qq >= stop:
                break
            first = max(qq, -(-start // q) * q)
            mark[first - start::q] = False
        found = np.flatnonzero(mark)
        if found.size:
            yield found.astype(np.int64) + start
        start = stop


def primes_in_range(lo: int, hi: int) -> list[int]:
    """Primes in ``[lo, hi)``, ascending."""
    out: list[int] = []
    for seg in iter_prime_segments(lo, hi):
        out.extend(seg.tolist())
    return out


@lru_cache(maxsize=1)
def _trial_primes() -> tuple[int, ...]:
    return tuple(_simple_sieve(TRIAL_LIMIT).tolist())


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for all ``n < 2^64``."""
    if n < 2:
        return False
    for q in MR_WITNESSES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while not d & 1:
        d >>= 1
        s += 1
    for a in MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _brent(n: int) -> int:
    """A nontrivial factor of the odd composite ``n`` (Pollard-rho, Brent's cycle search)."""
    # deterministic sequence of (seed, constant) pairs keeps factorize() pure
    for c in range(1, n):
        y, m, g, r, q = 2, 128, 1, 1, 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r <<= 1
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise ArithmeticError(f"rho failed on {n}")


def _split(n: int, acc: dict[int, int]) -> None:
    if n == 1:
        return
    if is_prime(n):
        acc[n] = acc.get(n, 0) + 1
        return
    r = math.isqrt(n)
    if r * r == n:
        _split(r, acc)
        _split(r, acc)
        return
    d = _brent(n)
    _split(d, acc)
    _split(n // d, acc)


def factorize(n: int) -> FactoredInteger:
    """Complete factorization of ``1 <= n < 2^63``.

    Trial division by the primes below 10^5, then Pollard-rho on the
    cofactor with Miller-Rabin certification of every prime factor.
    """
    if not 1 <= n <= INT63_MAX:
        raise ValueError(f"factorize needs 1 <= n < 2^63, got {n}")
    acc: dict[int, int] = {}
    m = n
    for q in _trial_primes():
        if q * q > m:
            break
        if m % q == 0:
            e = 0
            while m % q == 0:
                m //= q
                e += 1
            acc[q] = e
    if m > 1:
        if m < TRIAL_LIMIT * TRIAL_LIMIT:
            acc[m] = acc.get(m, 0) + 1
        else:
            _split(m, acc)
    return FactoredInteger(n, tuple(sorted(acc.items())))


def big_omega(n: int) -> int:
    return factorize(n).big_omega


def little_omega(n: int) -> int:
    return factorize(n).little_omega


def omega_trunc(a: int, z: float) -> int:
    """omega(a) plus the number of pairs (p, v), p >= z, v >= 2, with p^v | a."""
    if a < 1:
        raise ValueError("omega_trunc needs a >= 1")
    total = 0
    for p, e in factorize(a).factors:
        total += 1
        if p >= z:
            total += e - 1
    return total


def mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for _, e in f.factors):
        return 0
    return -1 if f.little_omega % 2 else 1


def squarefree_divisors(n: int) -> list[int]:
    """Squarefree divisors of ``n`` in ascending order."""
    divs = [1]
    for p in factorize(n).primes:
        divs += [d * p for d in divs]
    return sorted(divs)


def _log_integral(x: float, power: int, rtol: float) -> float:
    # substitute t = e^s: dt / (log t)^k = e^s / s^k ds
    if x <= 2:
        return 0.0
    a, b = math.log(2.0), math.log(x)

    def f(s: float) -> float:
        return math.exp(s) / s**power

    rough = adaptive_simpson(f, a, b, tol=1e-3 * (x / b**power + 1.0))
    return adaptive_simpson(f, a, b, tol=rtol * rough)


def li2(x: float, rtol: float = 1e-12) -> float:
    """int_2^x dt / (log t)^2."""
    return _log_integral(x, 2, rtol)


def li(x: float, rtol: float = 1e-12) -> float:
    """Offset logarithmic integral int_2^x dt / log t."""
    return _log_integral(x, 1, rtol)
