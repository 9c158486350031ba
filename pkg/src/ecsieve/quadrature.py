"""Adaptive Simpson quadrature shared by the logarithmic integrals and the sieve integrals."""

from __future__ import annotations

import math
from typing import Callable

MAX_DEPTH = 60


def _simpson(fa: float, fm: float, fb: float, h: float) -> float:
    return h * (fa + 4.0 * fm + fb) / 6.0


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-10, max_depth: int = MAX_DEPTH) -> float:
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    Each panel is accepted once the two-half estimate differs from the
    whole-panel estimate by at most ``15 * tol_panel``; the accepted value
    carries the Richardson correction ``(S2 - S1) / 15``. Panels are
    processed left to right with an explicit stack and accepted values are
    combined with ``math.fsum``, so the result is independent of recursion
    order.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = _simpson(fa, fm, fb, b - a)
    pieces: list[float] = []
    # (a, b, fa, fm, fb, whole, tol, depth)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = _simpson(flo, flm, fmid, mid - lo)
        right = _simpson(fmid, frm, fhi, hi - mid)
        delta = left + right - s
        if depth >= max_depth or abs(delta) <= 15.0 * eps:
            pieces.append(left + right + delta / 15.0)
            continue
        # right pushed first so the left half is resolved first
        stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
        stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))
    return sign * math.fsum(pieces)

