"""Twin-prime and Koblitz constants as truncated Euler products with certified tails."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .arith import primes_in_range
from .gl2 import GaloisImageSpec, prob_coprime


@dataclass(frozen=True)
class ConstantEstimate:
    """A truncated Euler product and the multiplicative half-width of its tail."""

    value: float
    tail_bound: float
    cutoff: int
    image_mode: str

    @property
    def interval(self) -> tuple[float, float]:
        return (self.value * (1.0 - self.tail_bound), self.value * (1.0 + self.tail_bound))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["interval"] = list(self.interval)
        return out


def euler_factor(l: int) -> Fraction:
    """E(l) = 1 - (l^2 - l - 1) / ((l - 1)^3 (l + 1)) for full image at l."""
    return 1 - Fraction(l * l - l - 1, (l - 1) ** 3 * (l + 1))


def _log_euler_factors(primes: np.ndarray) -> np.ndarray:
    l = primes.astype(np.float64)
    return np.log1p(-(l * l - l - 1.0) / ((l - 1.0) ** 3 * (l + 1.0)))


def twin_constant_classical(cutoff: int) -> ConstantEstimate:
    """2 * prod_{2 < l <= cutoff} (1 - 1/(l-1)^2).

    Tail: for l >= 3 each missing factor has -log(1 - t) <= 2t with
    t = 1/(l-1)^2, and sum_{n >= cutoff} 2/n^2 <= 2/(cutoff - 1).
    """
    if cutoff < 3:
        raise ValueError("cutoff must be >= 3")
    l = np.asarray(primes_in_range(3, cutoff + 1), dtype=np.float64)
    logs = np.log1p(-1.0 / (l - 1.0) ** 2)
    value = 2.0 * math.exp(math.fsum(logs.tolist()))
    return ConstantEstimate(value, math.expm1(2.0 / (cutoff - 1)), cutoff, "classical")


def correction_factor(image: GaloisImageSpec) -> Fraction:
    """(1 - |Omega(M_E)|/|G(M_E)|) / prod_{l | M_E} (1 - 1/l)."""
    denom = Fraction(1)
    for l in image.ramified_primes:
        denom *= 1 - Fraction(1, l)
    return prob_coprime(image) / denom


def koblitz_tail_bound(cutoff: int) -> float:
    # 1 - E(l) <= 2/l^2 and E(l) >= 7/9 for l >= 3, so -log E(l) <= (18/7)/l^2;
    # summing over l > cutoff with sum_{n > y} 1/n^2 <= 1/y
    return math.expm1(18.0 / (7.0 * max(cutoff, 2)))


def koblitz_constant(image: GaloisImageSpec, cutoff: int) -> ConstantEstimate:
    """C_E^twin truncated at ``cutoff``.

    Primes dividing M_E enter through :func:`correction_factor`; every other
    prime up to ``cutoff`` contributes its generic Euler factor. The product
    is accumulated in log space with ``math.fsum``.
    """
    bad = image.ramified_primes
    if bad and cutoff < max(bad):
        raise ValueError(f"cutoff {cutoff} below the largest prime {max(bad)} dividing m_e")
    l = np.asarray(primes_in_range(2, cutoff + 1), dtype=np.int64)
    if bad:
        l = l[~np.isin(l, bad)]
    corr = correction_factor(image)
    if corr == 0:
        return ConstantEstimate(0.0, 0.0, cutoff, image.label)
    terms = _log_euler_factors(l).tolist()
    terms.append(math.log(corr.numerator) - math.log(corr.denominator))
    return ConstantEstimate(math.exp(math.fsum(terms)), koblitz_tail_bound(cutoff), cutoff, image.label)


def koblitz_partial_exact(image: GaloisImageSpec, cutoff: int) -> Fraction:
    """Exact rational value of the truncated product (small cutoffs only)."""
    bad = set(image.ramified_primes)
    out = correction_factor(image)
    for l in primes_in_range(2, cutoff + 1):
        if l not in bad:
            out *= euler_factor(l)
    return out
