"""Integer polynomials, Sturm sequences and real root isolation.

Polynomials are tuples of ints, lowest degree first, with no trailing zero.
All sign evaluations at rational points are done with homogenized integer
arithmetic, so nothing here ever rounds.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd

__all__ = [
    "Poly",
    "trim",
    "content",
    "primitive",
    "derivative",
    "prem",
    "poly_gcd",
    "squarefree",
    "sturm_sequence",
    "sign_at",
    "variations",
    "count_roots",
    "cauchy_bound",
    "isolate_positive_roots",
    "RootInterval",
    "refine",
]

Poly = tuple[int, ...]


def trim(p) -> Poly:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return tuple(p)


def content(p: Poly) -> int:
    g = 0
    for c in p:
        g = gcd(g, c)
    return g


def primitive(p: Poly) -> Poly:
    """Divide by the positive content; the sign of every value is kept."""
    g = content(p)
    return tuple(c // g for c in p) if g > 1 else p


def derivative(p: Poly) -> Poly:
    return trim(i * p[i] for i in range(1, len(p)))


def prem(a: Poly, b: Poly) -> Poly:
    """Pseudo-remainder of a by b, scaled by |lc(b)|^k so its sign is honest."""
    r = list(a)
    db = len(b) - 1
    lc = b[-1]
    m = abs(lc)
    sgn = 1 if lc > 0 else -1
    while len(r) - 1 >= db and r:
        c = r[-1]
        shift = len(r) - 1 - db
        # r <- m r - sgn c x^shift b  keeps the multiplier positive
        r = [m * x for x in r]
        for i, bc in enumerate(b):
            r[i + shift] -= sgn * c * bc
        r = list(trim(r))
    return trim(r)


def poly_gcd(a: Poly, b: Poly) -> Poly:
    a, b = primitive(trim(a)), primitive(trim(b))
    while b:
        r = prem(a, b)
        a, b = b, primitive(r)
    if a and a[-1] < 0:
        a = tuple(-c for c in a)
    return a


def _exact_div(a: Poly, b: Poly) -> Poly:
    a = [Fraction(x) for x in a]
    q = [Fraction(0)] * (len(a) - len(b) + 1)
    for i in range(len(q) - 1, -1, -1):
        c = a[i + len(b) - 1] / b[-1]
        q[i] = c
        for j, bc in enumerate(b):
            a[i + j] -= c * bc
    if any(a):
        raise ArithmeticError("division was not exact")
    den = 1
    for c in q:
        den = den * c.denominator // gcd(den, c.denominator)
    return primitive(trim(int(c * den) for c in q))


def squarefree(p: Poly) -> Poly:
    p = primitive(trim(p))
    if len(p) <= 2:
        return p
    g = poly_gcd(p, derivative(p))
    if len(g) <= 1:
        return p
    s = _exact_div(p, g)
    if s[-1] * p[-1] < 0:
        s = tuple(-c for c in s)
    return s


@lru_cache(maxsize=4096)
def sturm_sequence(p: Poly) -> tuple[Poly, ...]:
    seq = [p, derivative(p)]
    while seq[-1] and len(seq[-1]) > 1:
        r = prem(seq[-2], seq[-1])
        if not r:
            break
        seq.append(primitive(tuple(-c for c in r)))
    return tuple(s for s in seq if s)


def sign_at(p: Poly, x: Fraction) -> int:
    """Sign of p(x) for rational x."""
    x = Fraction(x)
    num, den = x.numerator, x.denominator
    n = len(p) - 1
    acc = 0
    pw_num, pw_den = 1, den ** n
    for i, c in enumerate(p):
        if c:
            acc += c * pw_num * pw_den
        pw_num *= num
        if i < n:
            pw_den //= den
    return (acc > 0) - (acc < 0)


def variations(seq: tuple[Poly, ...], x: Fraction) -> int:
    v, last = 0, 0
    for s in seq:
        sg = sign_at(s, x)
        if sg == 0:
            continue
        if last and sg != last:
            v += 1
        last = sg
    return v


def count_roots(seq: tuple[Poly, ...], a: Fraction, b: Fraction) -> int:
    """Distinct roots in (a, b] of the square-free seq[0]."""
    return variations(seq, a) - variations(seq, b)


def cauchy_bound(p: Poly) -> Fraction:
    lc = abs(p[-1])
    return 1 + Fraction(max((abs(c) for c in p[:-1]), default=0), lc)


class RootInterval:
    """A simple root of p isolated in (lo, hi), or exactly lo == hi."""

    __slots__ = ("p", "lo", "hi", "slo")

    def __init__(self, p: Poly, lo: Fraction, hi: Fraction):
        self.p, self.lo, self.hi = p, Fraction(lo), Fraction(hi)
        self.slo = sign_at(p, self.lo) if self.lo != self.hi else 0

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    def bisect(self) -> None:
        if self.exact:
            return
        mid = (self.lo + self.hi) / 2
        sm = sign_at(self.p, mid)
        if sm == 0:
            self.lo = self.hi = mid
            self.slo = 0
        elif sm == self.slo:
            self.lo = mid
        else:
            self.hi = mid

    def __repr__(self) -> str:
        return f"RootInterval({self.lo}, {self.hi})"


def refine(root: RootInterval, width: Fraction) -> RootInterval:
    while not root.exact and root.hi - root.lo > width:
        root.bisect()
    return root


def isolate_positive_roots(p: Poly) -> list[RootInterval]:
    """Isolating intervals for the positive roots of a square-free p with p(0) != 0."""
    if len(p) <= 1:
        return []
    seq = sturm_sequence(p)
    out: list[RootInterval] = []
    stack = [(Fraction(0), cauchy_bound(p))]
    while stack:
        lo, hi = stack.pop()
        n = count_roots(seq, lo, hi)
        if n == 0:
            continue
        if n == 1 and sign_at(p, hi) != 0:
            out.append(RootInterval(p, lo, hi))
            continue
        mid = (lo + hi) / 2
        if sign_at(p, mid) == 0:
            out.append(RootInterval(p, mid, mid))
            # step off the exact root so both halves have nonroot ends
            eps = (hi - lo) / 4
            while sign_at(p, mid - eps) == 0 or sign_at(p, mid + eps) == 0 or \
                    count_roots(seq, mid - eps, mid + eps) != 1:
                eps /= 2
            stack.append((mid + eps, hi))
            stack.append((lo, mid - eps))
            continue
        stack.append((mid, hi))
        stack.append((lo, mid))
    out.sort(key=lambda r: r.lo)
    return out
