"""Counting the matrix sets C(n) and Omega(m) inside GL_2(Z/nZ).

C(n) holds the g with det g + 1 - tr g = 0 mod n, the Frobenius classes
forcing n | |E(F_p)|; Omega(m) holds the g of the image group with
gcd(det g + 1 - tr g, m) != 1. Densities are exact ``Fraction`` values.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

from .arith import INT63_MAX, factorize, mobius, squarefree_divisors

BRUTE_FORCE_CAP = 400
CLOSURE_CAP = 10**7


class CapExceeded(RuntimeError):
    pass


class NotInvertible(ValueError):
    pass


@dataclass(frozen=True)
class MatrixModN:
    n: int
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("modulus must be >= 1")
        for name in "abcd":
            object.__setattr__(self, name, getattr(self, name) % self.n)

    @property
    def det(self) -> int:
        return (self.a * self.d - self.b * self.c) % self.n

    @property
    def trace(self) -> int:
        return (self.a + self.d) % self.n

    @property
    def is_invertible(self) -> bool:
        return math.gcd(self.det, self.n) == 1

    def __matmul__(self, other: "MatrixModN") -> "MatrixModN":
        if other.n != self.n:
            raise ValueError("moduli differ")
        a, b, c, d = self.a, self.b, self.c, self.d
        e, f, g, h = other.a, other.b, other.c, other.d
        return MatrixModN(self.n, a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    def __str__(self) -> str:
        return f"{self.a},{self.b};{self.c},{self.d}"

    @classmethod
    def identity(cls, n: int) -> "MatrixModN":
        return cls(n, 1, 0, 0, 1)

    @classmethod
    def parse(cls, text: str, n: int) -> "MatrixModN":
        """Parse ``"a,b;c,d"``."""
        try:
            top, bottom = text.strip().split(";")
            a, b = (int(s) for s in top.split(","))
            c, d = (int(s) for s in bottom.split(","))
        except ValueError as exc:
            raise ValueError(f"bad matrix {text!r}, expected 'a,b;c,d'") from exc
        return cls(n, a, b, c, d)


def gl2_order(n: int) -> int:
    """|GL_2(Z/nZ)|, raising OverflowError beyond the signed 64-bit range."""
    if n < 1:
        raise ValueError("n must be >= 1")
    order = 1
    for l, e in factorize(n).factors:
        order *= l ** (4 * (e - 1)) * (l * l - 1) * (l * l - l)
    if order > INT63_MAX:
        raise OverflowError(f"|GL_2(Z/{n}Z)| = {order} exceeds 2^63 - 1")
    return order


@lru_cache(maxsize=64)
def _product_counts(n: int) -> np.ndarray:
    """counts[r] = #{(b, c) mod n : b*c = r mod n}."""
    r = np.arange(n, dtype=np.int64)
    return np.bincount((np.multiply.outer(r, r) % n).ravel(), minlength=n)


@lru_cache(maxsize=64)
def _unit_mask(n: int) -> np.ndarray:
    return np.gcd(np.arange(n, dtype=np.int64), n) == 1


def _brute_count_C(n: int) -> int:
    # every matrix (a, b, c, d) is visited once: (a, d) explicitly and (b, c)
    # through the table of products b*c
    if n == 1:
        return 1
    unit = _unit_mask(n)
    bc = _product_counts(n)
    a = np.arange(n, dtype=np.int64)[:, None]
    d = np.arange(n, dtype=np.int64)[None, :]
    det = (a + d - 1) % n  # forced by det + 1 - tr = 0
    need = (a * d - det) % n
    return int(bc[need][unit[det]].sum())


def density_C_prime(l: int) -> Fraction:
    """|C(l)| / |GL_2(F_l)| = (l^2 - 2) / ((l - 1)(l^2 - 1))."""
    return Fraction(l * l - 2, (l - 1) * (l * l - 1))


def density_C_prime_squared(l: int) -> Fraction:
    """|C(l^2)| / |GL_2(Z/l^2)| = (l^3 - l - 1) / (l^2 (l^2 - 1)(l - 1))."""
    return Fraction(l**3 - l - 1, l * l * (l * l - 1) * (l - 1))


def density_C(n: int) -> Fraction:
    """Closed-form |C(n)|/|G(n)| for full image, n with no prime cubed."""
    dens = Fraction(1)
    for l, e in factorize(n).factors:
        if e == 1:
            dens *= density_C_prime(l)
        elif e == 2:
            dens *= density_C_prime_squared(l)
        else:
            raise ValueError(f"no closed form for C({n}): {l}^{e} divides it")
    return dens


def count_C(n: int, method: str = "auto", cap: int = BRUTE_FORCE_CAP) -> int:
    """#{g in GL_2(Z/nZ) : det g + 1 - tr g = 0 mod n}.

    ``method`` is ``"brute"`` (scan all n^4 matrices, n <= cap),
    ``"closed"`` (product of the prime and prime-square densities) or
    ``"auto"`` (brute force within the cap, closed form beyond).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if method == "auto":
        method = "brute" if n <= cap else "closed"
    if method == "brute":
        if n > cap:
            raise CapExceeded(f"brute-force count of C({n}) exceeds cap {cap}")
        return _brute_count_C(n)
    if method == "closed":
        count = density_C(n) * gl2_order(n)
        assert count.denominator == 1
        return int(count)
    raise ValueError(f"unknown method {method!r}")


def _brute_count_Omega_full(m: int) -> int:
    if m == 1:
        return 0
    unit = _unit_mask(m)
    bc = _product_counts(m)
    d = np.arange(m, dtype=np.int64)[:, None]
    r = np.arange(m, dtype=np.int64)[None, :]
    total = 0
    for a in range(m):
        det = (a * d - r) % m
        key = (det + 1 - a - d) % m
        sel = unit[det] & ~unit[key]
        total += int((sel * bc[r]).sum())
    return total


def _encode(g: MatrixModN) -> int:
    n = g.n
    return ((g.a * n + g.b) * n + g.c) * n + g.d


def _decode(code: int, n: int) -> tuple[int, int, int, int]:
    code, d = divmod(code, n)
    code, c = divmod(code, n)
    a, b = divmod(code, n)
    return a, b, c, d


def _closure_codes(gens: Sequence[MatrixModN], cap: int) -> set[int]:
    n = gens[0].n
    if any(g.n != n for g in gens):
        raise ValueError("generators must share one modulus")
    bad = [str(g) for g in gens if not g.is_invertible]
    if bad:
        raise NotInvertible(f"not invertible mod {n}: {bad}")
    steps = [(g.a, g.b, g.c, g.d) for g in gens]
    one = _encode(MatrixModN.identity(n))
    seen = {one}
    queue = deque([one])
    while queue:
        a, b, c, d = _decode(queue.popleft(), n)
        for e, f, g, h in steps:
            code = ((((a * e + b * g) % n * n + (a * f + b * h) % n) * n
                     + (c * e + d * g) % n) * n + (c * f + d * h) % n)
            if code not in seen:
                seen.add(code)
                if len(seen) > cap:
                    raise CapExceeded(f"closure exceeds {cap} elements")
                queue.append(code)
    return seen


def subgroup_closure(gens: Iterable[MatrixModN], cap: int = CLOSURE_CAP) -> set[MatrixModN]:
    """The subgroup generated by ``gens`` (breadth-first under right multiplication)."""
    gens = list(gens)
    if not gens:
        raise ValueError("need at least one generator")
    n = gens[0].n
    return {MatrixModN(n, *_decode(c, n)) for c in _closure_codes(gens, cap)}


@dataclass(frozen=True)
class GaloisImageSpec:
    """Serre's modulus M_E with the mod-M_E image: all of GL_2 or a generated subgroup."""

    m_e: int
    generators: tuple[MatrixModN, ...] | None = None

    def __post_init__(self):
        if self.m_e < 1:
            raise ValueError("m_e must be >= 1")
        if self.generators is not None:
            if not self.generators:
                raise ValueError("generator mode needs at least one matrix")
            for g in self.generators:
                if g.n != self.m_e:
                    raise ValueError(f"generator {g} has modulus {g.n}, expected {self.m_e}")
                if not g.is_invertible:
                    raise NotInvertible(f"generator {g} is not invertible mod {self.m_e}")

    @classmethod
    def full(cls, m_e: int) -> "GaloisImageSpec":
        return cls(m_e)

    @property
    def mode(self) -> str:
        return "full" if self.generators is None else "generators"

    @property
    def label(self) -> str:
        if self.generators is None:
            return f"FullImage(m_e={self.m_e})"
        return f"Generators(m_e={self.m_e}, k={len(self.generators)})"

    @property
    def ramified_primes(self) -> tuple[int, ...]:
        return factorize(self.m_e).primes

    @cached_property
    def _elements(self) -> set[int]:
        return _closure_codes(self.generators, CLOSURE_CAP)

    @cached_property
    def group_order(self) -> int:
        if self.generators is None:
            return gl2_order(self.m_e)
        return len(self._elements)

    @cached_property
    def omega_count(self) -> int:
        m = self.m_e
        if self.generators is None:
            if m > BRUTE_FORCE_CAP:
                raise CapExceeded(f"full-image Omega({m}) exceeds brute-force cap {BRUTE_FORCE_CAP}")
            return _brute_count_Omega_full(m)
        count = 0
        for code in self._elements:
            a, b, c, d = _decode(code, m)
            if math.gcd(a * d - b * c + 1 - a - d, m) != 1:
                count += 1
        return count


def count_Omega(image: GaloisImageSpec) -> int:
    return image.omega_count


def prob_coprime(image: GaloisImageSpec) -> Fraction:
    """1 - |Omega(M_E)| / |G(M_E)|."""
    return 1 - Fraction(image.omega_count, image.group_order)


def inclusion_exclusion(m: int) -> Fraction:
    """sum over d | m of mu(d) |C(d)|/|G(d)| with full image, squarefree d only."""
    return sum((mobius(d) * Fraction(count_C(d, "brute"), gl2_order(d))
                for d in squarefree_divisors(m)), Fraction(0))


def parse_generators(lines: Iterable[str], m_e: int) -> tuple[MatrixModN, ...]:
    """Matrices ``a,b;c,d`` one per line; blank lines and ``#`` comments skipped."""
    out = []
    for line in lines:
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(MatrixModN.parse(line, m_e))
    return tuple(out)
