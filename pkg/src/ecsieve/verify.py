"""Fast self-checks behind ``ecsieve verify``; each returns (name, ok, detail)."""

from __future__ import annotations

import math
from fractions import Fraction

from .arith import primes_in_range
from .ec_reduction import count_points_bsgs, count_points_naive, make_curve
from .gl2 import GaloisImageSpec, count_C, density_C_prime, gl2_order, inclusion_exclusion, prob_coprime
from .koblitz import koblitz_constant, twin_constant_classical
from .sieve_theory import alpha, beta, lower_bound_constant, r_of_theta, upper_bound_constant


def run_checks() -> list[tuple[str, bool, str]]:
    out = []
    for th in (Fraction(1, 2), Fraction(11, 21), Fraction(3, 5)):
        c = lower_bound_constant(th) * (1 - float(th))
        out.append((f"2J(1-theta) at theta={th}", abs(c - 1.32304) <= 5e-4, f"{c:.6f}"))
    out.append(("alpha(1/4) = beta(1/4) = 0", abs(alpha(0.25)) < 1e-12 and abs(beta(0.25)) < 1e-12, ""))
    out.append(("r(1/2) = 8", r_of_theta(Fraction(1, 2)) == 8, str(r_of_theta(Fraction(1, 2)))))
    out.append(("lower(11/21) >= 2.778", lower_bound_constant(Fraction(11, 21)) >= 2.778,
                f"{lower_bound_constant(Fraction(11, 21)):.5f}"))
    up = upper_bound_constant(0.5, 1e-9)
    out.append(("upper(1/2, eps) -> 10", abs(up - 10) <= 1e-9 + math.ulp(10.0), f"{up:.10f}"))
    ok = all(Fraction(count_C(l), gl2_order(l)) == density_C_prime(l) for l in primes_in_range(2, 14))
    out.append(("|C(l)|/|G(l)| closed form, l <= 13", ok, ""))
    ok = all(prob_coprime(GaloisImageSpec(m)) == inclusion_exclusion(m) for m in (2, 3, 5, 6, 10, 15))
    out.append(("inclusion-exclusion for m | 30", ok, ""))
    curve = make_curve(0, 0, 1, -1, 0)
    ok = all(count_points_naive(curve, p) == count_points_bsgs(curve, p) for p in primes_in_range(233, 1000))
    out.append(("naive = BSGS on [233, 1000) for y^2+y=x^3-x", ok, ""))
    tw = twin_constant_classical(10**5).value
    out.append(("twin constant at 10^5 in [1.320, 1.321]", 1.320 <= tw <= 1.321, f"{tw:.7f}"))
    k = koblitz_constant(GaloisImageSpec(1), 10**5)
    out.append(("Koblitz product (m_e = 1) in (0.4, 0.6)", 0.4 < k.value < 0.6, f"{k.value:.7f}"))
    return out
