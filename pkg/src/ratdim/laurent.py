"""Laurent polynomials in e^x with the strict pointwise order over a closed F.

f = sum c_n e^{nx} with rational c_n in D_n.  Positivity on F is decided
exactly: with t = e^x the question becomes the sign of a polynomial on
images of the components of F inside (0, inf).  Roots are isolated with
Sturm sequences.  A component endpoint e^a (a rational, a != 0) is
transcendental, so it never equals an algebraic root, and refining both
enclosures always separates them.  a = 0 gives t = 1 and is compared exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Optional

from .intervals import eval_exp_sum, exp_enclosure, log_lower as _log_lower, log_upper as _log_upper
from .polys import RootInterval, Poly, isolate_positive_roots, sign_at, squarefree, trim
from .supernatural import (
    SupernaturalNumber,
    dn_contains,
    format_rational,
    lcm_all,
    parse_rational,
    supernatural_from_json,
    supernatural_to_json,
)

__all__ = [
    "LaurentPoly",
    "Segment",
    "ClosedSetR",
    "Point",
    "Interval",
    "RayBelow",
    "RayAbove",
    "WholeLine",
    "Witness",
    "PositivityVerdict",
    "Order",
    "strictly_positive_on",
    "cone_member",
    "rev_lex_compare",
    "domination_radius",
    "verify_witness",
    "laurent_from_json",
    "laurent_to_json",
    "closed_set_from_json",
    "closed_set_to_json",
]


# -- Laurent polynomials -----------------------------------------------------------

def _join(a: SupernaturalNumber, b: SupernaturalNumber) -> SupernaturalNumber:
    return a if a == b else a.lcm(b)


@dataclass(frozen=True)
class LaurentPoly:
    """Finitely supported exponent -> coefficient map over D_modulus."""

    coeffs: tuple[tuple[int, Fraction], ...] = ()
    modulus: SupernaturalNumber = SupernaturalNumber.universal_number()

    def __post_init__(self):
        merged: dict[int, Fraction] = {}
        for n, c in self.coeffs:
            if not isinstance(n, int) or isinstance(n, bool):
                raise ValueError(f"exponent {n!r} is not an integer")
            merged[n] = merged.get(n, Fraction(0)) + Fraction(c)
        items = tuple(sorted((n, c) for n, c in merged.items() if c != 0))
        for n, c in items:
            if not dn_contains(c, self.modulus):
                raise ValueError(f"coefficient {c} of e^({n}x) is not in D_{self.modulus}")
        object.__setattr__(self, "coeffs", items)

    @classmethod
    def from_dict(cls, d: Mapping[int, object], modulus: SupernaturalNumber | None = None) -> "LaurentPoly":
        return cls(tuple((int(n), Fraction(c)) for n, c in d.items()),
                   modulus if modulus is not None else SupernaturalNumber.universal_number())

    @classmethod
    def const(cls, c, modulus: SupernaturalNumber | None = None) -> "LaurentPoly":
        return cls.from_dict({0: c}, modulus)

    @classmethod
    def monomial(cls, n: int, c=1, modulus: SupernaturalNumber | None = None) -> "LaurentPoly":
        return cls.from_dict({n: c}, modulus)

    def as_dict(self) -> dict[int, Fraction]:
        return dict(self.coeffs)

    def coefficient(self, n: int) -> Fraction:
        return self.as_dict().get(n, Fraction(0))

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(n for n, _ in self.coeffs)

    @property
    def min_exp(self) -> int:
        return self.coeffs[0][0]

    @property
    def max_exp(self) -> int:
        return self.coeffs[-1][0]

    def with_modulus(self, m: SupernaturalNumber) -> "LaurentPoly":
        return LaurentPoly(self.coeffs, m)

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        if not isinstance(other, LaurentPoly):
            other = LaurentPoly.const(other, self.modulus)
        return LaurentPoly(self.coeffs + other.coeffs, _join(self.modulus, other.modulus))

    __radd__ = __add__

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly(tuple((n, -c) for n, c in self.coeffs), self.modulus)

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        if not isinstance(other, LaurentPoly):
            other = LaurentPoly.const(other, self.modulus)
        return self + (-other)

    def __rsub__(self, other) -> "LaurentPoly":
        return (-self) + other

    def __mul__(self, other) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            out: dict[int, Fraction] = {}
            for n, c in self.coeffs:
                for m, d in other.coeffs:
                    out[n + m] = out.get(n + m, Fraction(0)) + c * d
            return LaurentPoly(tuple(out.items()), self.modulus * other.modulus
                               if self.modulus != other.modulus else self.modulus)
        c = Fraction(other)
        return LaurentPoly(tuple((n, c * v) for n, v in self.coeffs), self.modulus)

    __rmul__ = __mul__

    def shift(self, k: int) -> "LaurentPoly":
        """Multiply by e^{kx}."""
        return LaurentPoly(tuple((n + k, c) for n, c in self.coeffs), self.modulus)

    def reflect(self) -> "LaurentPoly":
        """x -> -x."""
        return LaurentPoly(tuple((-n, c) for n, c in self.coeffs), self.modulus)

    def value_at_zero(self) -> Fraction:
        return sum((c for _, c in self.coeffs), Fraction(0))

    def enclose(self, x_lo, x_hi=None, bits: int = 64) -> tuple[Fraction, Fraction]:
        """Certified enclosure of f over [x_lo, x_hi]."""
        x_hi = x_lo if x_hi is None else x_hi
        if Fraction(x_lo) == 0 and Fraction(x_hi) == 0:
            v = self.value_at_zero()
            return v, v
        tl = exp_enclosure(Fraction(x_lo), bits)[0]
        th = exp_enclosure(Fraction(x_hi), bits)[1]
        return eval_exp_sum(self.coeffs, tl, th)

    def t_poly(self) -> Poly:
        """Integer polynomial with the sign of f at t = e^x, for t > 0."""
        if not self.coeffs:
            return ()
        base = self.min_exp
        den = lcm_all(c.denominator for _, c in self.coeffs)
        out = [0] * (self.max_exp - base + 1)
        for n, c in self.coeffs:
            out[n - base] = int(c * den)
        return trim(out)

    def sequence(self) -> dict[int, Fraction]:
        """The coefficient sequence, an element of the direct sum of copies of D_n."""
        return self.as_dict()

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for n, c in self.coeffs:
            parts.append(format_rational(c) if n == 0 else f"{format_rational(c)}*e^({n}x)")
        return " + ".join(parts)


# -- closed subsets of R ------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Segment:
    """[lo, hi] with None for an infinite end; lo == hi is a point."""

    lo: Optional[Fraction]
    hi: Optional[Fraction]

    def __post_init__(self):
        lo = None if self.lo is None else Fraction(self.lo)
        hi = None if self.hi is None else Fraction(self.hi)
        if lo is not None and hi is not None and lo > hi:
            raise ValueError(f"empty segment [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def kind(self) -> str:
        if self.lo is None and self.hi is None:
            return "line"
        if self.lo is None:
            return "ray_below"
        if self.hi is None:
            return "ray_above"
        return "point" if self.lo == self.hi else "interval"

    def contains(self, x) -> bool:
        x = Fraction(x)
        return (self.lo is None or self.lo <= x) and (self.hi is None or x <= self.hi)

    def reflect(self) -> "Segment":
        return Segment(None if self.hi is None else -self.hi, None if self.lo is None else -self.lo)

    def sample(self) -> Fraction:
        if self.lo is not None:
            return self.lo
        if self.hi is not None:
            return self.hi
        return Fraction(0)


def Point(a) -> Segment:
    return Segment(Fraction(a), Fraction(a))


def Interval(a, b) -> Segment:
    return Segment(Fraction(a), Fraction(b))


def RayBelow(a) -> Segment:
    """(-inf, a]."""
    return Segment(None, Fraction(a))


def RayAbove(b) -> Segment:
    """[b, inf)."""
    return Segment(Fraction(b), None)


def WholeLine() -> Segment:
    return Segment(None, None)


def _sort_key(s: Segment):
    return (0, 0) if s.lo is None else (1, s.lo)


@dataclass(frozen=True)
class ClosedSetR:
    """Finite union of closed segments, sorted and merged."""

    components: tuple[Segment, ...] = ()

    def __post_init__(self):
        comps = sorted(self.components, key=_sort_key)
        merged: list[Segment] = []
        for c in comps:
            if merged:
                last = merged[-1]
                if last.hi is None or (c.lo is not None and c.lo <= last.hi) or c.lo is None:
                    hi = None if (last.hi is None or c.hi is None) else max(last.hi, c.hi)
                    merged[-1] = Segment(last.lo, hi)
                    continue
            merged.append(c)
        object.__setattr__(self, "components", tuple(merged))

    @classmethod
    def of(cls, *components: Segment) -> "ClosedSetR":
        return cls(tuple(components))

    def is_empty(self) -> bool:
        return not self.components

    @property
    def bounded_below(self) -> bool:
        return bool(self.components) and self.components[0].lo is not None

    @property
    def bounded_above(self) -> bool:
        return bool(self.components) and self.components[-1].hi is not None

    @property
    def semi_bounded(self) -> bool:
        return self.is_empty() or self.bounded_below or self.bounded_above

    @property
    def bounded(self) -> bool:
        return self.is_empty() or (self.bounded_below and self.bounded_above)

    @property
    def inf(self) -> Optional[Fraction]:
        return self.components[0].lo

    @property
    def sup(self) -> Optional[Fraction]:
        return self.components[-1].hi

    def contains(self, x) -> bool:
        return any(c.contains(x) for c in self.components)

    def reflect(self) -> "ClosedSetR":
        return ClosedSetR(tuple(c.reflect() for c in self.components))

    def intersect_segment(self, seg: Segment) -> "ClosedSetR":
        out = []
        for c in self.components:
            lo = c.lo if seg.lo is None else (seg.lo if c.lo is None else max(c.lo, seg.lo))
            hi = c.hi if seg.hi is None else (seg.hi if c.hi is None else min(c.hi, seg.hi))
            if lo is not None and hi is not None and lo > hi:
                continue
            out.append(Segment(lo, hi))
        return ClosedSetR(tuple(out))

    def sample_point(self) -> Fraction:
        return self.components[0].sample()

    def __str__(self) -> str:
        def one(c: Segment) -> str:
            lo = "-inf" if c.lo is None else format_rational(c.lo)
            hi = "inf" if c.hi is None else format_rational(c.hi)
            return "{" + lo + "}" if c.kind == "point" else f"[{lo}, {hi}]"
        return " u ".join(one(c) for c in self.components) or "{}"


# -- positivity ---------------------------------------------------------------------

@dataclass(frozen=True)
class Witness:
    """Where f fails to be strictly positive.

    kind "point": f(x) <= 0 at the rational x = x_lo = x_hi of F.
    kind "root": the square-free part of the t-polynomial changes sign on
    [t_lo, t_hi] (or vanishes at t_lo == t_hi), which lies inside e^F, so f
    has a zero at some x in [x_lo, x_hi] of F.
    """

    kind: str
    x_lo: Fraction
    x_hi: Fraction
    t_lo: Optional[Fraction] = None
    t_hi: Optional[Fraction] = None


@dataclass(frozen=True)
class PositivityVerdict:
    kind: str  # "positive", "zero", "not_positive"
    witness: Optional[Witness] = None

    @property
    def positive(self) -> bool:
        return self.kind == "positive"


POSITIVE = PositivityVerdict("positive")
IS_ZERO = PositivityVerdict("zero")


@lru_cache(maxsize=4096)
def _roots(s: Poly) -> tuple[RootInterval, ...]:
    return tuple(isolate_positive_roots(s))


def _compare_root(s: Poly, r: RootInterval, a: Fraction) -> int:
    """Sign of (root - e^a).  Refines r in place."""
    if a == 0:
        if r.exact:
            return (r.lo > 1) - (r.lo < 1)
        if r.lo < 1 < r.hi and sign_at(s, Fraction(1)) == 0:
            r.lo = r.hi = Fraction(1)
            return 0
        while True:
            if r.hi <= 1:
                return -1
            if r.lo >= 1:
                return 1
            r.bisect()
            if r.exact:
                return (r.lo > 1) - (r.lo < 1)
    bits = 64
    while True:
        tl, th = exp_enclosure(a, bits)
        if r.exact:
            if r.lo < tl:
                return -1
            if r.lo > th:
                return 1
            bits *= 2
            continue
        if r.hi <= tl:
            return -1
        if r.lo >= th:
            return 1
        if r.hi - r.lo > th - tl:
            r.bisect()
        else:
            bits *= 2


def _root_witness(s: Poly, r: RootInterval, comp: Segment) -> Witness:
    if r.exact and r.lo == 1:
        return Witness("point", Fraction(0), Fraction(0))
    bits = 64
    while True:
        lo_ok = comp.lo is None or r.lo >= exp_enclosure(comp.lo, bits)[1]
        hi_ok = comp.hi is None or r.hi <= exp_enclosure(comp.hi, bits)[0]
        if lo_ok and hi_ok and r.lo > 0:
            break
        if r.exact:
            bits *= 2
        else:
            r.bisect()
            bits += 8
    xl, xh = _log_lower(r.lo), _log_upper(r.hi)
    if comp.lo is not None:
        xl = max(xl, comp.lo)
    if comp.hi is not None:
        xh = min(xh, comp.hi)
    return Witness("root", xl, xh, r.lo, r.hi)


def _sign_at_point(f: LaurentPoly, x: Fraction) -> int:
    """Sign of f(x); certain to terminate when f(x) != 0 (always so for x != 0)."""
    if x == 0:
        v = f.value_at_zero()
        return (v > 0) - (v < 0)
    bits = 64
    while True:
        lo, hi = f.enclose(x, x, bits)
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        bits *= 2


def _root_in_segment(s: Poly, r: RootInterval, comp: Segment) -> bool:
    if comp.lo is not None and _compare_root(s, r, comp.lo) < 0:
        return False
    if comp.hi is not None and _compare_root(s, r, comp.hi) > 0:
        return False
    return True


def strictly_positive_on(f: LaurentPoly, F: ClosedSetR) -> PositivityVerdict:
    """Exact three-way answer: Positive, IsZero or NotPositive(witness)."""
    if f.is_zero():
        return IS_ZERO
    if F.is_empty():
        return POSITIVE
    q = f.t_poly()
    if len(q) == 1:
        if q[0] > 0:
            return POSITIVE
        x = F.sample_point()
        return PositivityVerdict("not_positive", Witness("point", x, x))
    s = squarefree(q)
    roots = [RootInterval(r.p, r.lo, r.hi) for r in _roots(s)]
    for comp in F.components:
        for r in roots:
            if _root_in_segment(s, r, comp):
                return PositivityVerdict("not_positive", _root_witness(s, r, comp))
        x = comp.sample()
        if _sign_at_point(f, x) < 0:
            return PositivityVerdict("not_positive", Witness("point", x, x))
    return POSITIVE


def cone_member(f: LaurentPoly, F: ClosedSetR) -> bool:
    """f = 0 or f > 0 everywhere on F."""
    return f.is_zero() or strictly_positive_on(f, F).positive


def verify_witness(f: LaurentPoly, F: ClosedSetR, w: Witness) -> bool:
    """Independent re-check of a NotPositive witness."""
    if w.kind == "point":
        if not F.contains(w.x_lo):
            return False
        if w.x_lo == 0:
            return f.value_at_zero() <= 0
        lo, hi = f.enclose(w.x_lo, w.x_lo, 256)
        return hi < 0
    if w.kind == "root":
        if not (F.contains(w.x_lo) and F.contains(w.x_hi)):
            return False
        if not any(c.contains(w.x_lo) and c.contains(w.x_hi) for c in F.components):
            return False
        # [t_lo, t_hi] inside [e^x_lo, e^x_hi]
        if exp_enclosure(w.x_lo, 128)[1] > w.t_lo or exp_enclosure(w.x_hi, 128)[0] < w.t_hi:
            return False
        s = squarefree(f.t_poly())
        if w.t_lo == w.t_hi:
            return sign_at(s, w.t_lo) == 0
        return sign_at(s, w.t_lo) * sign_at(s, w.t_hi) < 0
    return False


# -- reverse lexicographic order ------------------------------------------------------

class Order(Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def rev_lex_compare(f: LaurentPoly, g: LaurentPoly) -> Order:
    """Compare coefficient sequences at the largest index where they differ."""
    d = (g - f)
    if d.is_zero():
        return Order.EQUAL
    return Order.LESS if d.coeffs[-1][1] > 0 else Order.GREATER


def domination_radius(f: LaurentPoly, g: LaurentPoly) -> Fraction:
    """For f <_lex g, an integer r >= 0 with g - f > 0 on [r, inf), certified.

    With h = g - f = c_N e^{Nx} + lower terms and x >= 0,
    h >= e^{Nx} (c_N - e^{-x} sum |c_n|), positive once e^x > sum |c_n| / c_N.
    """
    if rev_lex_compare(f, g) is not Order.LESS:
        raise ValueError("domination_radius needs f <_lex g")
    h = g - f
    top = h.coeffs[-1][1]
    rest = sum((abs(c) for _, c in h.coeffs[:-1]), Fraction(0))
    r = 0
    if rest > top:
        r = math.ceil(math.log(rest.numerator * top.denominator) - math.log(rest.denominator * top.numerator)) + 1
    r = Fraction(max(r, 0))
    while not strictly_positive_on(h, ClosedSetR.of(RayAbove(r))).positive:
        r += 1
    return r


# -- JSON -----------------------------------------------------------------------

def laurent_to_json(f: LaurentPoly) -> dict:
    return {"coeffs": [[n, format_rational(c)] for n, c in f.coeffs],
            "modulus": supernatural_to_json(f.modulus)}


def laurent_from_json(obj, default_modulus: SupernaturalNumber | None = None) -> LaurentPoly:
    if not isinstance(obj, dict) or "coeffs" not in obj:
        raise ValueError("Laurent polynomial needs 'coeffs'")
    if "modulus" in obj:
        m = supernatural_from_json(obj["modulus"])
    else:
        m = default_modulus or SupernaturalNumber.universal_number()
    pairs = []
    for pair in obj["coeffs"]:
        if not isinstance(pair, list) or len(pair) != 2 or isinstance(pair[0], bool) or not isinstance(pair[0], int):
            raise ValueError(f"bad coefficient entry {pair!r}")
        pairs.append((pair[0], parse_rational(pair[1])))
    return LaurentPoly(tuple(pairs), m)


def _segment_to_json(c: Segment) -> list:
    k = c.kind
    if k == "line":
        return ["line"]
    if k == "point":
        return ["point", format_rational(c.lo)]
    if k == "interval":
        return ["interval", format_rational(c.lo), format_rational(c.hi)]
    if k == "ray_below":
        return ["ray_below", format_rational(c.hi)]
    return ["ray_above", format_rational(c.lo)]


def closed_set_to_json(F: ClosedSetR) -> list:
    return [_segment_to_json(c) for c in F.components]


def closed_set_from_json(obj) -> ClosedSetR:
    if isinstance(obj, dict):
        obj = obj.get("components")
    if not isinstance(obj, list):
        raise ValueError("closed set must be a list of components")
    comps = []
    for c in obj:
        if not isinstance(c, list) or not c:
            raise ValueError(f"bad component {c!r}")
        k, args = c[0], [parse_rational(x) for x in c[1:]]
        if k == "point" and len(args) == 1:
            comps.append(Point(args[0]))
        elif k == "interval" and len(args) == 2:
            comps.append(Interval(*args))
        elif k == "ray_below" and len(args) == 1:
            comps.append(RayBelow(args[0]))
        elif k == "ray_above" and len(args) == 1:
            comps.append(RayAbove(args[0]))
        elif k == "line" and not args:
            comps.append(WholeLine())
        else:
            raise ValueError(f"bad component {c!r}")
    return ClosedSetR(tuple(comps))

