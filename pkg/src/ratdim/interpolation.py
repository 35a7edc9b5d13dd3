"""Riesz interpolation in the Laurent group over a semi-bounded closed set.

Given p0, p1 <= q0, q1 in the strict pointwise order over F, build a with
p_i <= a <= q_j.  For F unbounded above, a = a0 + (correction), where a0 sits
between the p's and q's in the reverse lexicographic order, so it is right
far out, and the correction only uses exponents below the leading exponent of
every margin (a polynomial in s = e^{-x} times e^{-Nx}, plus low input
exponents).  Bounded F uses a polynomial in t = e^x next to the input
exponents.  Coefficients come from a max-margin linear program on sample
points of F; every candidate is checked exactly with strictly_positive_on and
any counterexample becomes a new sample.  Floats only steer the search.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .intervals import exp_enclosure, log_lower, log_upper
from .laurent import (
    ClosedSetR,
    LaurentPoly,
    Order,
    RayAbove,
    Segment,
    cone_member,
    rev_lex_compare,
    strictly_positive_on,
)
from .ordered import PreconditionError
from .piecewise import PiecewiseLinear
from .polys import isolate_positive_roots, squarefree
from .supernatural import INF, SupernaturalNumber

__all__ = [
    "NotSemiBoundedError",
    "InsufficientDensityError",
    "InterpolationFailed",
    "PiecewiseLinear",
    "compact_uniform_approx",
    "interpolate_semibounded",
    "converse_witness",
    "ConverseReport",
]

GRID = 240


class NotSemiBoundedError(ValueError):
    pass


class InsufficientDensityError(ValueError):
    """Coefficient rounding into a discrete D_n cannot meet the tolerance."""


class InterpolationFailed(RuntimeError):
    """The escalation schedule ran out; never observed on valid input."""


# -- Chebyshev machinery ---------------------------------------------------------------

def _cheb_coeffs(g: Callable[[float], float], D: int) -> list[float]:
    """Coefficients of the degree-D interpolant of g on [-1, 1] at Chebyshev nodes."""
    M = D + 1
    us = [math.cos(math.pi * (k + 0.5) / M) for k in range(M)]
    vals = [g(u) for u in us]
    out = []
    for j in range(M):
        s = sum(vals[k] * math.cos(math.pi * j * (k + 0.5) / M) for k in range(M))
        out.append(s * (1 if j == 0 else 2) / M)
    return out


def _round_to(c: float, den: int) -> Fraction:
    return Fraction(round(c * den), den)


def _cheb_to_monomial(gamma: Sequence[Fraction], A: Fraction, W: Fraction) -> list[Fraction]:
    """Exact monomial coefficients in v of sum gamma_k T_k(u), u = 2(v - A)/W - 1."""
    u = [-1 - 2 * A / W, 2 / W]  # u as a polynomial in v
    out = [Fraction(0)] * len(gamma)
    prev, cur = [Fraction(1)], u[:]

    def axpy(c, poly):
        for i, x in enumerate(poly):
            out[i] += c * x

    axpy(gamma[0], prev)
    if len(gamma) > 1:
        axpy(gamma[1], cur)
    for k in range(2, len(gamma)):
        nxt = [Fraction(0)] * (len(cur) + 1)
        for i, x in enumerate(cur):
            nxt[i] += 2 * u[0] * x
            nxt[i + 1] += 2 * u[1] * x
        for i, x in enumerate(prev):
            nxt[i] -= x
        prev, cur = cur, nxt
        axpy(gamma[k], cur)
    return out


def _prime_for(n: SupernaturalNumber) -> Optional[int]:
    """A prime whose powers are all invertible in D_n, or None for finite n."""
    if n.universal:
        return 2
    for p, e in n.factors:
        if e is INF:
            return p
    return None


def _power_above(p: int, v: float) -> Fraction:
    """Smallest p^j (j in Z) with p^j >= v."""
    j = math.ceil(math.log(v) / math.log(p)) if v > 0 else 0
    w = Fraction(p) ** j
    while float(w) < v:
        w *= p
    return w


@dataclass
class _Approx:
    """A polynomial in v (t = e^x or s = e^{-x}) with its Chebyshev data.

    ``slack`` bounds |d/du| of the difference between ``mono`` and the
    Chebyshev form, nonzero only when monomial coefficients were rounded.
    """

    mono: list[Fraction]
    gamma: list[Fraction]
    A: Fraction
    W: Fraction
    slack: Fraction = Fraction(0)


def _approximate(g: Callable[[float], float], A: Fraction, W: Fraction, D: int,
                 n: SupernaturalNumber, d: float) -> _Approx:
    """Degree-D Chebyshev interpolant of g on [A, A+W] with coefficients in D_n."""
    Af, Wf = float(A), float(W)
    raw = _cheb_coeffs(lambda u: g(Af + (u + 1) * Wf / 2), D)
    p = _prime_for(n)
    if p is not None:
        den = p
        while den < 16 * (D + 1) / d:
            den *= p
        gamma = [_round_to(c, den) for c in raw]
        return _Approx(_cheb_to_monomial(gamma, A, W), gamma, A, W)
    # discrete D_n: round the monomial coefficients directly
    M = n.finite_value()
    gamma = [Fraction(c) for c in raw]
    exact = _cheb_to_monomial(gamma, A, W)
    mono = [Fraction(round(c * M), M) for c in exact]
    slack = sum((k * abs(m - e) * W ** k for k, (m, e) in enumerate(zip(mono, exact))), Fraction(0)) / 2
    return _Approx(mono, gamma, A, W, slack)


def _laurent_from_t(mono: Sequence[Fraction], n: SupernaturalNumber) -> LaurentPoly:
    return LaurentPoly(tuple((k, c) for k, c in enumerate(mono) if c), n)


# -- certification of the standalone approximation ---------------------------------------

def _poly_eval(mono: Sequence[Fraction], v: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(mono):
        acc = acc * v + c
    return acc


def _certify(ap: _Approx, target: PiecewiseLinear, K: ClosedSetR, d: Fraction, depth: int = 16) -> bool:
    """sup_K |target - a| < d by a mean-value bound in the Chebyshev variable.

    On [-1, 1], |T_k'| <= k^2, so |p'(u)| <= sum k^2 |gamma_k| (+ slack).
    Each cell [a, b] in t is checked at its centre, with the target's range
    over the matching x-interval.
    """
    M1 = sum((k * k * abs(g) for k, g in enumerate(ap.gamma)), Fraction(0)) + ap.slack
    for seg in K.components:
        stack = [(exp_enclosure(seg.lo, 64)[0], exp_enclosure(seg.hi, 64)[1], 0)]
        while stack:
            a, b, k = stack.pop()
            m = (a + b) / 2
            av = _poly_eval(ap.mono, m)
            x_lo = max(seg.lo, log_lower(a))
            x_hi = min(seg.hi, log_upper(b))
            f_lo, f_hi = target.range_on(x_lo, max(x_lo, x_hi))
            err = max(abs(av - f_lo), abs(av - f_hi)) + M1 * (b - a) / ap.W
            if err < d:
                continue
            if k >= depth:
                return False
            stack.append((a, m, k + 1))
            stack.append((m, b, k + 1))
    return True


def _round_into(c: Fraction, n: SupernaturalNumber, tol: Fraction) -> Fraction:
    """An element of D_n within tol of c (exact when possible)."""
    from .supernatural import dn_contains
    if dn_contains(c, n):
        return c
    p = _prime_for(n)
    den = n.finite_value() if p is None else p
    while p is not None and Fraction(1, den) >= tol:
        den *= p
    return Fraction(round(c * den), den)


def compact_uniform_approx(target: PiecewiseLinear, K: ClosedSetR, d, n: SupernaturalNumber,
                           max_degree: int = 128) -> LaurentPoly:
    """a in D_n[e^x] with sup over K of |target - a| < d, certified.

    Chebyshev interpolation in t = e^x over [0, W], W a power of a prime
    invertible in D_n, then rounding into D_n.  The degree doubles until the
    certificate holds.
    """
    d = Fraction(d)
    if d <= 0:
        raise ValueError("d must be positive")
    if not K.bounded:
        raise ValueError("K must be bounded")
    if K.is_empty():
        return LaurentPoly((), n)
    lo, hi = target.range_on(K.inf, K.sup)
    if hi - lo < 2 * d:
        c = _round_into((lo + hi) / 2, n, d - (hi - lo) / 2)
        if hi - c < d and c - lo < d:
            return LaurentPoly.const(c, n)
    p = _prime_for(n)
    if p is None:
        W = Fraction(max(1, math.ceil(math.exp(float(K.sup)))))
    else:
        W = _power_above(p, math.exp(float(K.sup)) * 1.001)
    f = target.float_eval()

    def g(t: float) -> float:
        return f(math.log(t)) if t > 0 else f(float(K.inf))

    deg = 4
    while deg <= max_degree:
        ap = _approximate(g, Fraction(0), W, deg, n, float(d))
        if _certify(ap, target, K, d):
            return _laurent_from_t(ap.mono, n)
        deg *= 2
    if p is None:
        raise InsufficientDensityError(f"coefficients in D_{n} cannot reach tolerance {d}")
    raise InterpolationFailed(f"no certified approximation up to degree {max_degree}")


# -- interpolation ---------------------------------------------------------------------

def _fval(f: LaurentPoly, x: float) -> float:
    return math.fsum(float(c) * math.exp(k * x) for k, c in f.coeffs)


def _check_pairs(F: ClosedSetR, ps: Sequence[LaurentPoly], qs: Sequence[LaurentPoly]) -> None:
    for i, p in enumerate(ps):
        for j, q in enumerate(qs):
            if not cone_member(q - p, F):
                raise PreconditionError(f"p{i} <= q{j} fails on F")


def _valid(a: LaurentPoly, F: ClosedSetR, ps, qs) -> bool:
    return _first_violation(a, F, ps, qs) is None


def _first_violation(a: LaurentPoly, F: ClosedSetR, ps, qs) -> Optional[float]:
    """None if p_i < a < q_j on F (or equality), else a point of F near a failure."""
    for h in [a - p for p in ps] + [q - a for q in qs]:
        if h.is_zero():
            continue
        v = strictly_positive_on(h, F)
        if not v.positive:
            w = v.witness
            return float((w.x_lo + w.x_hi) / 2)
    return None


def _sample_grid(F: ClosedSetR, lo: float, hi: float, count: int = GRID) -> list[float]:
    """Points of F inside [lo, hi]: a uniform grid plus every component endpoint."""
    xs: set[float] = set()
    step = (hi - lo) / count if hi > lo else 1.0
    for seg in F.components:
        a = lo if seg.lo is None else max(lo, float(seg.lo))
        b = hi if seg.hi is None else min(hi, float(seg.hi))
        if a > b:
            continue
        xs.add(a)
        xs.add(b)
        k = math.ceil((a - lo) / step)
        while lo + k * step < b:
            xs.add(lo + k * step)
            k += 1
    return sorted(xs)


def _lex_max(fs: Sequence[LaurentPoly]) -> LaurentPoly:
    best = fs[0]
    for f in fs[1:]:
        if rev_lex_compare(best, f) is Order.LESS:
            best = f
    return best


def _lex_min(fs: Sequence[LaurentPoly]) -> LaurentPoly:
    best = fs[0]
    for f in fs[1:]:
        if rev_lex_compare(f, best) is Order.LESS:
            best = f
    return best


def _tail_radius(hs: Sequence[LaurentPoly], start: Fraction) -> Fraction:
    """Integer R >= start with every h > 0 on [R, inf); each h has positive leading term."""
    R = start
    for h in hs:
        s = squarefree(h.t_poly())
        roots = isolate_positive_roots(s) if len(s) > 1 else []
        if roots:
            R = max(R, log_upper(max(r.hi for r in roots)) + 1)
    R = Fraction(math.ceil(R))
    while not all(strictly_positive_on(h, ClosedSetR.of(RayAbove(R))).positive for h in hs):
        R += 1
    return R


def _cheb_columns(us: Sequence[float], D: int) -> list[list[float]]:
    cols = [[1.0] * len(us)]
    if D >= 1:
        cols.append(list(us))
    for _ in range(2, D + 1):
        cols.append([2 * u * a - b for u, a, b in zip(us, cols[-1], cols[-2])])
    return cols


@dataclass
class _Space:
    """Correction space a = a0 + sum b_k e^{kx} + w(x) sum gamma_j T_j(u(v)).

    v = e^{sign x}, u = 2 (v - A) / W - 1 and w = e^{shift x}.
    """

    exps: list[int]
    D: int
    sign: int
    A: Fraction
    W: Fraction
    shift: int
    ranges: dict = field(default_factory=dict)  # exponent -> allowed (lo, hi) for b_k

    def columns(self, xs: Sequence[float]) -> list[list[float]]:
        cols = [[math.exp(k * x) for x in xs] for k in self.exps]
        vs = [math.exp(self.sign * x) for x in xs]
        Af, Wf = float(self.A), float(self.W)
        us = [2 * (v - Af) / Wf - 1 for v in vs]
        ws = [math.exp(self.shift * x) for x in xs]
        for col in _cheb_columns(us, self.D):
            cols.append([w * c for w, c in zip(ws, col)])
        return cols

    def build(self, coeffs: Sequence[Fraction], n: SupernaturalNumber) -> LaurentPoly:
        k = len(self.exps)
        out = LaurentPoly(tuple((e, c) for e, c in zip(self.exps, coeffs[:k]) if c), n)
        mono = _cheb_to_monomial(list(coeffs[k:]), self.A, self.W)
        cheb = LaurentPoly(tuple((self.sign * i + self.shift, c) for i, c in enumerate(mono) if c), n)
        return out + cheb


def _fit(space: _Space, xs: Sequence[float], lo: Sequence[float], hi: Sequence[float]):
    """Max-margin coefficients: maximize tau with lo + tau g <= c <= hi - tau g."""
    import numpy as np
    from scipy.optimize import linprog

    B = np.array(space.columns(xs)).T
    lo_a, hi_a = np.array(lo), np.array(hi)
    g = hi_a - lo_a
    keep = g > 0
    B, lo_a, hi_a, g = B[keep], lo_a[keep], hi_a[keep], g[keep]
    Bn = B / g[:, None]
    scale = np.max(np.abs(Bn), axis=0)
    scale[scale == 0] = 1.0
    Bs = Bn / scale
    m = Bs.shape[1]
    A_ub = np.vstack([np.hstack([-Bs, np.ones((len(g), 1))]),
                      np.hstack([Bs, np.ones((len(g), 1))])])
    b_ub = np.concatenate([-lo_a / g, hi_a / g])
    cost = np.zeros(m + 1)
    cost[-1] = -1.0
    bounds = [(-1e9, 1e9)] * m + [(None, 0.5)]
    for j, k in enumerate(space.exps):
        if k in space.ranges:
            l, u = space.ranges[k]
            bounds[j] = (l * scale[j], u * scale[j])
    res = linprog(cost, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if res.status != 0:
        return None, -1.0
    coeffs = res.x[:m] / scale
    # rounding budget: total column magnitude against the smallest margin
    budget = float(res.x[-1]) * float(np.min(g)) / 4
    colmax = float(np.sum(np.max(np.abs(B), axis=0))) or 1.0
    return (list(coeffs), budget / colmax), float(res.x[-1])


def _round_coeffs(coeffs: Sequence[float], n: SupernaturalNumber, tol: float) -> list[Fraction]:
    p = _prime_for(n)
    if p is None:
        den = n.finite_value()
    else:
        den = p
        while 1 / den > tol and den < 1 << 200:
            den *= p
    return [_round_to(c, den) for c in coeffs]


def _search(F: ClosedSetR, ps, qs, a0: LaurentPoly, make_space, x_lo: float, x_hi: float,
            n: SupernaturalNumber, degrees=(0, 2, 4, 6, 8, 12, 16, 24, 32), rounds: int = 8) -> LaurentPoly:
    """Fit corrections in growing spaces; add exact counterexamples as new samples."""
    dps = [a0 - p for p in ps]
    dqs = [q - a0 for q in qs]
    xs = _sample_grid(F, x_lo, x_hi)
    for D in degrees:
        space = make_space(D)
        pts = list(xs)
        sharpen = 1.0
        for _ in range(rounds):
            lo = [max(-_fval(h, x) for h in dps) for x in pts]
            hi = [min(_fval(h, x) for h in dqs) for x in pts]
            sol, tau = _fit(space, pts, lo, hi)
            if sol is None or tau <= 0:
                break
            coeffs, tol = sol
            a = a0 + space.build(_round_coeffs(coeffs, n, tol / sharpen), n)
            bad = _first_violation(a, F, ps, qs)
            if bad is None:
                return a
            if bad in pts:
                # the fit already saw this point: rounding or float error, so tighten both
                sharpen *= 1 << 12
                step = (x_hi - x_lo) / (8 * GRID)
                pts = sorted(set(pts) | {bad - step, bad + step})
            else:
                pts = sorted(set(pts) | {bad})
    if _prime_for(n) is None:
        raise InsufficientDensityError(f"D_{n} is too sparse for the correction search")
    raise InterpolationFailed("escalation schedule exhausted")


def _solve_unbounded(F: ClosedSetR, ps, qs, n: SupernaturalNumber) -> LaurentPoly:
    """F bounded below, unbounded above."""
    P, Q = _lex_max(ps), _lex_min(qs)
    gap = Q - P
    n0 = gap.max_exp
    cP, cQ = P.coefficient(n0), Q.coefficient(n0)
    # the base point taken by the proof, then a midpoint of the leading coefficients
    mid = _round_into((cP + cQ) / 2, n, (cQ - cP) / 4)
    candidates = [P + LaurentPoly.monomial(n0 - 1, 1, n),
                  P + LaurentPoly.monomial(n0, mid - cP, n)]
    for a0 in candidates:
        a0 = a0.with_modulus(n)
        if _valid(a0, F, ps, qs):
            return a0
    a0 = candidates[1].with_modulus(n)
    margins = [a0 - p for p in ps] + [q - a0 for q in qs]
    m = min(h.max_exp for h in margins)
    N = 1 - m
    one = LaurentPoly.const(1, n)
    ells = [(p - a0).shift(N) for p in ps]
    ups = [(q - a0).shift(N) for q in qs]
    c = F.inf
    R = _tail_radius([-(e + one) for e in ells] + [u - one for u in ups], c)
    p = _prime_for(n) or 2
    S = _power_above(p, math.exp(-float(c)) * 1.001)
    exps = sorted({k for f in ps + qs for k in f.support if k < m} | {n0})
    # the leading coefficient stays strictly between those of P and Q
    slack = float(cQ - cP) / 64
    ranges = {n0: (float(cP - mid) + slack, float(cQ - mid) - slack)}

    def make_space(D: int) -> _Space:
        return _Space(exps, D, -1, Fraction(0), S, -N, ranges)

    return _search(F, ps, qs, a0, make_space, float(c), float(R) + 2, n)


def _solve_bounded(F: ClosedSetR, ps, qs, n: SupernaturalNumber) -> LaurentPoly:
    lo, hi = float(F.inf), float(F.sup)
    p = _prime_for(n) or 2
    t_lo, t_hi = math.exp(lo), math.exp(hi)
    den = p
    while den * t_lo < 8:
        den *= p
    A = Fraction(math.floor(t_lo * den), den)
    W = _power_above(p, (t_hi - float(A)) * 1.001) if t_hi > float(A) else Fraction(1)
    exps = sorted({k for f in ps + qs for k in f.support})
    zero = LaurentPoly((), n)

    def make_space(D: int) -> _Space:
        return _Space(exps, D, 1, A, W, 0)

    return _search(F, ps, qs, zero, make_space, lo, hi, n)


def _modulus_of(fs: Sequence[LaurentPoly]) -> SupernaturalNumber:
    n = fs[0].modulus
    for f in fs[1:]:
        if f.modulus != n:
            n = n.lcm(f.modulus)
    return n


def interpolate_semibounded(F: ClosedSetR, p0: LaurentPoly, p1: LaurentPoly,
                            q0: LaurentPoly, q1: LaurentPoly) -> LaurentPoly:
    """An a with p_i <= a <= q_j in the F-order, re-checked by cone_member."""
    if F.is_empty():
        raise ValueError("F must be nonempty")
    if not F.semi_bounded:
        raise NotSemiBoundedError("F is unbounded in both directions")
    ps, qs = [p0, p1], [q0, q1]
    _check_pairs(F, ps, qs)
    n = _modulus_of(ps + qs)
    for p in ps:
        for q in qs:
            if p == q:
                return p.with_modulus(n)
    ps = [p.with_modulus(n) for p in ps]
    qs = [q.with_modulus(n) for q in qs]
    if F.bounded:
        a = _solve_bounded(F, ps, qs, n)
    elif F.bounded_below:
        a = _solve_unbounded(F, ps, qs, n)
    else:
        a = interpolate_semibounded(F.reflect(), *[f.reflect() for f in ps + qs]).reflect()
    if not _valid(a, F, ps, qs):  # pragma: no cover - every branch already validated
        raise InterpolationFailed("candidate failed validation")
    return a


# -- the converse ---------------------------------------------------------------------

@dataclass(frozen=True)
class ConverseReport:
    N: int
    p0: LaurentPoly
    p1: LaurentPoly
    q0: LaurentPoly
    q1: LaurentPoly
    lower_bound: Fraction       # p1 <= c forces c >= this
    argmax_t: Fraction          # where p1 attains it, in t = e^x
    upper_bound: Fraction       # c <= q0 on R forces c <= this
    infeasible: bool
    checks: dict = field(default_factory=dict)


def bounded_on_line(f: LaurentPoly) -> bool:
    """A Laurent polynomial is bounded on R iff it is constant."""
    return all(k == 0 for k in f.support)


def converse_witness(N: int) -> ConverseReport:
    """The quadruple over F = R with no interpolant, checked symbolically.

    p0 = -1, p1 = (N - e^x)(e^x - 2N), q0 = e^{2x}, q1 = N^2.
    Any interpolant is bounded (between p0 and q1 is not enough; between
    p0 <= a <= q1 gives boundedness above and below), so it is a constant c.
    p1(t) = -t^2 + 3N t - 2N^2 peaks at t = 3N/2 with value N^2/4, so c >= N^2/4;
    q0 = t^2 tends to 0 as t -> 0, so c <= 0.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    u = SupernaturalNumber.universal_number()
    L = LaurentPoly.from_dict
    p0 = L({0: -1}, u)
    p1 = L({0: N}, u) - L({1: 1}, u)
    p1 = p1 * (L({1: 1}, u) - L({0: 2 * N}, u))
    q0 = L({2: 1}, u)
    q1 = L({0: N * N}, u)
    line = ClosedSetR.of(Segment(None, None))
    checks: dict = {}
    # the quadruple satisfies the hypothesis p_i <= q_j on R
    for i, p in enumerate((p0, p1)):
        for j, q in enumerate((q0, q1)):
            checks[f"p{i}<=q{j}"] = cone_member(q - p, line)
    # p1 as a quadratic in t: coefficients (c0, c1, c2)
    c0, c1, c2 = (p1.coefficient(k) for k in (0, 1, 2))
    argmax = -c1 / (2 * c2)
    peak = c0 + c1 * argmax + c2 * argmax * argmax
    checks["p1 is concave in t"] = c2 < 0
    checks["argmax is 3N/2"] = argmax == Fraction(3 * N, 2)
    checks["peak is N^2/4"] = peak == Fraction(N * N, 4)
    checks["argmax in (N, 2N)"] = N < argmax < 2 * N
    # q0 = t^2 has infimum 0 on t > 0, not attained
    checks["q0 has infimum 0"] = q0.support == (2,) and q0.coefficient(2) > 0
    checks["e^x + e^-x is not bounded"] = not bounded_on_line(L({1: 1, -1: 1}, u))
    checks["constants are bounded"] = bounded_on_line(L({0: 7}, u))
    lower, upper = peak, Fraction(0)
    return ConverseReport(N, p0, p1, q0, q1, lower, argmax, upper,
                          infeasible=lower > upper and all(checks.values()), checks=checks)
