"""Certified rational enclosures of e^a and interval evaluation of exponential sums.

Enclosures are dyadic rationals.  e^a is computed as (e^(a/2^s))^(2^s) with a
truncated Taylor series whose tail is bounded explicitly, and every rounding
step goes outward.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import ceil, factorial, floor, log
from typing import Iterable

__all__ = ["exp_enclosure", "exp_interval", "eval_exp_sum", "log_lower", "log_upper", "Interval"]

Interval = tuple[Fraction, Fraction]


def _floor_div_pow2(n: int, w: int) -> int:
    return n >> w


def _ceil_div_pow2(n: int, w: int) -> int:
    return -((-n) >> w)


@lru_cache(maxsize=65536)
def exp_enclosure(a: Fraction, bits: int = 64) -> Interval:
    """(lo, hi) with lo <= e^a <= hi, relative width about 2^-bits."""
    a = Fraction(a)
    if a == 0:
        return Fraction(1), Fraction(1)
    if a < 0:
        lo, hi = exp_enclosure(-a, bits)
        return 1 / hi, 1 / lo
    s = 0
    while abs(a) / (1 << s) > Fraction(1, 2):
        s += 1
    r = a / (1 << s)
    w = bits + s + 12
    # Taylor partial sum with |tail| <= 2 |r|^(K+1) / (K+1)!  for |r| <= 1/2
    K = 4
    while Fraction(2) * abs(r) ** (K + 1) / factorial(K + 1) > Fraction(1, 1 << (w + 2)):
        K += 1
    total = Fraction(0)
    term = Fraction(1)
    for k in range(K + 1):
        total += term
        term = term * r / (k + 1)
    tail = Fraction(2) * abs(r) ** (K + 1) / factorial(K + 1)
    scale = 1 << w
    lo = floor((total - tail) * scale)
    hi = ceil((total + tail) * scale)
    for _ in range(s):
        lo = _floor_div_pow2(lo * lo, w)
        hi = _ceil_div_pow2(hi * hi, w)
    return Fraction(lo, scale), Fraction(hi, scale)


def exp_interval(x_lo: Fraction, x_hi: Fraction, bits: int = 64) -> Interval:
    """Enclosure of e^x over x in [x_lo, x_hi] (e^x is increasing)."""
    return exp_enclosure(Fraction(x_lo), bits)[0], exp_enclosure(Fraction(x_hi), bits)[1]


def _pow_range(tl: Fraction, th: Fraction, n: int) -> Interval:
    if n >= 0:
        return tl ** n, th ** n
    return th ** n, tl ** n


def eval_exp_sum(terms: Iterable[tuple[int, Fraction]], t_lo: Fraction, t_hi: Fraction) -> Interval:
    """Enclosure of sum c_n t^n for t in [t_lo, t_hi], 0 < t_lo <= t_hi.

    Each monomial is monotone in t > 0, so its range is attained at the ends.
    """
    lo = Fraction(0)
    hi = Fraction(0)
    for n, c in terms:
        if not c:
            continue
        a, b = _pow_range(t_lo, t_hi, n)
        if c > 0:
            lo += c * a
            hi += c * b
        else:
            lo += c * b
            hi += c * a
    return lo, hi


def _float_log(t: Fraction) -> Fraction:
    return Fraction(log(t.numerator) - log(t.denominator))


def log_lower(t: Fraction) -> Fraction:
    """Rational x with e^x <= t, close to log t."""
    t = Fraction(t)
    x = _float_log(t) - Fraction(1, 10**9)
    while exp_enclosure(x, 64)[1] > t:
        x -= Fraction(1, 10**6)
    return x


def log_upper(t: Fraction) -> Fraction:
    """Rational x with e^x >= t, close to log t."""
    t = Fraction(t)
    x = _float_log(t) + Fraction(1, 10**9)
    while exp_enclosure(x, 64)[0] < t:
        x += Fraction(1, 10**6)
    return x
