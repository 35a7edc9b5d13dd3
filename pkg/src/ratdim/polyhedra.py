"""Exact enumeration of grid points inside small rational polyhedra.

Constraints are pairs (alpha, beta) meaning alpha . r >= beta.  Bounds on
the leading variable come from Fourier-Motzkin elimination of the others,
so the enumeration never visits points outside the projection.
"""
from __future__ import annotations

from fractions import Fraction
from math import ceil, floor
from typing import Iterator, Sequence

Constraint = tuple[tuple[Fraction, ...], Fraction]


def _normalize(cons: Sequence[Constraint]) -> list[Constraint] | None:
    out: dict[tuple, Fraction] = {}
    for alpha, beta in cons:
        if not any(alpha):
            if beta > 0:
                return None
            continue
        # scale so the first nonzero coefficient has absolute value 1
        lead = next(abs(a) for a in alpha if a)
        key = tuple(a / lead for a in alpha)
        b = beta / lead
        if key not in out or out[key] < b:
            out[key] = b
    return [(k, v) for k, v in out.items()]


def eliminate(cons: Sequence[Constraint], var: int) -> list[Constraint] | None:
    """Project out variable `var`; None signals an infeasible system."""
    pos, neg, rest = [], [], []
    for alpha, beta in cons:
        a = alpha[var]
        if a > 0:
            pos.append((alpha, beta))
        elif a < 0:
            neg.append((alpha, beta))
        else:
            rest.append((alpha, beta))
    for ap, bp in pos:
        for an, bn in neg:
            sp, sn = -an[var], ap[var]
            alpha = tuple(sp * x + sn * y for x, y in zip(ap, an))
            rest.append((alpha, sp * bp + sn * bn))
    return _normalize(rest)


def variable_bounds(cons: Sequence[Constraint], var: int, nvars: int) -> tuple[Fraction, Fraction] | None:
    """Exact range of variable `var` over the polyhedron (assumed bounded)."""
    cur = _normalize(cons)
    for v in range(nvars):
        if cur is None:
            return None
        if v != var:
            cur = eliminate(cur, v)
    if cur is None:
        return None
    lo, hi = None, None
    for alpha, beta in cur:
        a = alpha[var]
        if a > 0:
            lo = beta / a if lo is None else max(lo, beta / a)
        elif a < 0:
            hi = beta / a if hi is None else min(hi, beta / a)
    if lo is None or hi is None:
        raise ValueError("polyhedron is unbounded in the enumerated variable")
    if lo > hi:
        return None
    return lo, hi


def box(nvars: int, bound: Fraction) -> list[Constraint]:
    out = []
    for i in range(nvars):
        e = tuple(Fraction(int(i == j)) for j in range(nvars))
        out.append((e, -Fraction(bound)))
        out.append((tuple(-x for x in e), -Fraction(bound)))
    return out


def grid_points(cons: Sequence[Constraint], nvars: int, d: int) -> Iterator[tuple[Fraction, ...]]:
    """Points of (1/d) Z^nvars satisfying cons, in lexicographic order."""
    if nvars == 0:
        if all(beta <= 0 for _, beta in cons):
            yield ()
        return
    rng = variable_bounds(cons, 0, nvars)
    if rng is None:
        return
    lo, hi = rng
    for c in range(ceil(lo * d), floor(hi * d) + 1):
        r0 = Fraction(c, d)
        sub = [(alpha[1:], beta - alpha[0] * r0) for alpha, beta in cons]
        for rest in grid_points(sub, nvars - 1, d):
            yield (r0,) + rest

