"""Bracketed bisection.

Written against plain arithmetic so the same routine runs on ``float`` and on
``mpmath`` numbers.
"""
from __future__ import annotations

from typing import Callable

from .errors import NoBracket


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def bisect(f: Callable, lo, hi, *, xtol=0.0, max_iter: int = 5000, error=NoBracket):
    """Root of ``f`` in ``[lo, hi]``.

    Halves until the bracket is no wider than ``xtol`` or until the midpoint
    can no longer be distinguished from an endpoint (``xtol=0`` runs to the
    working precision). Raises ``error(lo, hi, f(lo), f(hi))`` when the end
    values do not differ in sign.
    """
    flo, fhi = f(lo), f(hi)
    slo, shi = _sign(flo), _sign(fhi)
    if slo == 0:
        return lo
    if shi == 0:
        return hi
    if slo == shi:
        raise error(lo, hi, flo, fhi)
    for _ in range(max_iter):
        if hi - lo <= xtol:
            break
        mid = (lo + hi) / 2
        if not lo < mid < hi:
            break
        s = _sign(f(mid))
        if s == 0:
            return mid
        if s == slo:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def first_sign_change(f: Callable, lo: float, hi: float, samples: int) -> tuple[float, float, int]:
    """Scan ``samples`` equal cells of ``(lo, hi)``; return the leftmost
    sign-changing cell and the number of sign changes between nonzero samples."""
    xs = [lo + (hi - lo) * i / samples for i in range(samples + 1)]
    vals = [f(x) for x in xs]
    first = None
    changes = 0
    last = 0  # sign of the latest nonzero sample
    for i, val in enumerate(vals):
        s = _sign(val)
        if s == 0:
            # a sample landing on a root: bisect returns the endpoint itself
            if first is None:
                first = (xs[i], xs[i])
            continue
        if last and s != last:
            changes += 1
            if first is None:
                first = (xs[i - 1], xs[i])
        last = s
    if first is None:
        raise NoBracket(lo, hi, vals[0], vals[-1])
    return first[0], first[1], changes
