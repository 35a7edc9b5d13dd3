"""Finite truncations of the group G_Z of a proper simplex bundle with singleton fibers.

The bundle is a closed F containing 0, so states are evaluations at points of
F.  An element of G_Z is a pair xi (+) f where xi is a finitely supported
integer sequence and f is a function on F of the form

    f(x) = sum over (j, m) of r_jm(x) * e^(jx) * (1 - e^(-x))^(-m),   m >= 0,

with every r_jm continuous piecewise linear with rational nodes.  Terms with
m > 0 must vanish near 0, where the factor has a pole.  Near 0, f agrees
with L(xi) = sum xi_n e^(nx).  The automorphism sigma multiplies f by e^(-x)
and shifts xi down by one index.

Everything is exact except the mixed (piecewise affine times exponential)
positivity test, which bisects with certified intervals and may answer Unknown.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping, Optional, Sequence

from .intervals import eval_exp_sum, exp_enclosure
from .lattice import IntegerMatrix, integer_solutions, lattice_basis, smith_normal_form, solve_echelon_int
from .laurent import (
    ClosedSetR,
    LaurentPoly,
    Segment,
    Witness,
    closed_set_from_json,
    closed_set_to_json,
    strictly_positive_on,
    verify_witness,
)
from .piecewise import PiecewiseLinear
from .supernatural import format_rational, lcm_all, parse_rational

__all__ = [
    "BundleSpec",
    "CutoffTriple",
    "ExpFn",
    "GZElement",
    "ExpPolyValue",
    "ElementVerdict",
    "SupportOverlapError",
    "ConsistencyError",
    "BetaNotInFError",
    "NotPositiveError",
    "make_gz_element",
    "combination",
    "order_unit",
    "apply_sigma",
    "one_minus_sigma",
    "sigma0",
    "element_positive",
    "verify_element_witness",
    "evaluate_state",
    "state_table",
    "truncated_generators",
    "KernelImageReport",
    "verify_kernel_image",
    "K0Report",
    "k0_crossed_product",
    "sigma_simplicity_probe",
    "bundle_to_json",
    "bundle_from_json",
    "element_to_json",
    "element_from_json",
]

DEFAULT_DEPTH = 40
_EVAL_BUDGET = 100_000


class SupportOverlapError(ValueError):
    """The compactly supported part meets the window around 0."""


class ConsistencyError(ValueError):
    """f(0) differs from the coefficient sum of xi."""


class BetaNotInFError(ValueError):
    pass


class NotPositiveError(ValueError):
    pass


_ZERO_PL = PiecewiseLinear.constant(0)


# -- the bundle and the cutoffs ------------------------------------------------------

@dataclass(frozen=True)
class BundleSpec:
    """Closed F containing 0; the fiber over each point is a single state."""

    F: ClosedSetR

    def __post_init__(self):
        if not self.F.contains(0):
            raise ValueError("the bundle set F must contain 0")


@dataclass(frozen=True)
class CutoffTriple:
    """psi_minus + psi_mid + psi_plus == 1, breakpoints at +-1/k and +-1/2k."""

    k: int
    minus: PiecewiseLinear
    mid: PiecewiseLinear
    plus: PiecewiseLinear

    @classmethod
    def of(cls, k: int) -> "CutoffTriple":
        if not isinstance(k, int) or k < 1:
            raise ValueError("k must be a positive integer")
        a, b = Fraction(1, k), Fraction(1, 2 * k)
        minus = PiecewiseLinear(((-a, Fraction(1)), (-b, Fraction(0))))
        plus = PiecewiseLinear(((b, Fraction(0)), (a, Fraction(1))))
        mid = PiecewiseLinear(((-a, Fraction(0)), (-b, Fraction(1)), (b, Fraction(1)), (a, Fraction(0))))
        return cls(k, minus, mid, plus)

    def __post_init__(self):
        total = self.minus + self.mid + self.plus
        if total != PiecewiseLinear.constant(1):
            raise ValueError("cutoffs do not sum to 1")


# -- functions on F ------------------------------------------------------------------

def _d_power(m: int) -> dict[int, int]:
    """(1 - e^-x)^m for m >= 0 as exponent -> integer coefficient."""
    return {-i: (-1) ** i * comb(m, i) for i in range(m + 1)}


def _merge(terms: Iterable[tuple[tuple[int, int], PiecewiseLinear]]) -> tuple:
    acc: dict[tuple[int, int], PiecewiseLinear] = {}
    for key, r in terms:
        acc[key] = acc[key] + r if key in acc else r
    return tuple(sorted((k, r) for k, r in acc.items() if not r.is_zero()))


@dataclass(frozen=True, eq=False)
class ExpFn:
    """sum of r_jm(x) e^(jx) (1 - e^-x)^(-m) over keys (j, m)."""

    terms: tuple[tuple[tuple[int, int], PiecewiseLinear], ...] = ()

    def __post_init__(self):
        terms = _merge(self.terms)
        for (j, m), r in terms:
            if m < 0:
                raise ValueError("negative key m; build (1 - e^-x)^m with laurent_times")
            if m > 0 and not r.vanishes_near(0):
                raise ValueError(f"term e^({j}x)(1-e^-x)^-{m} does not vanish near 0")
        object.__setattr__(self, "terms", terms)

    # construction
    @classmethod
    def zero(cls) -> "ExpFn":
        return cls(())

    @classmethod
    def laurent_times(cls, h: LaurentPoly, r: PiecewiseLinear, d_exp: int = 0) -> "ExpFn":
        """h(x) * (1 - e^-x)^d_exp * r(x); d_exp may be negative."""
        out = []
        if d_exp >= 0:
            expand = _d_power(d_exp)
            for n, c in h.coeffs:
                for i, b in expand.items():
                    out.append(((n + i, 0), r.scale(c * b)))
        else:
            for n, c in h.coeffs:
                out.append(((n, -d_exp), r.scale(c)))
        return cls(tuple(out))

    @classmethod
    def from_pl(cls, r: PiecewiseLinear) -> "ExpFn":
        return cls((((0, 0), r),))

    # arithmetic
    def __add__(self, other: "ExpFn") -> "ExpFn":
        return ExpFn(self.terms + other.terms)

    def __neg__(self) -> "ExpFn":
        return ExpFn(tuple((k, -r) for k, r in self.terms))

    def __sub__(self, other: "ExpFn") -> "ExpFn":
        return self + (-other)

    def scale(self, c) -> "ExpFn":
        return ExpFn(tuple((k, r.scale(c)) for k, r in self.terms))

    def shift(self, k: int) -> "ExpFn":
        """Multiply by e^(kx)."""
        return ExpFn(tuple(((j + k, m), r) for (j, m), r in self.terms))

    @property
    def den_power(self) -> int:
        return max((m for (_, m), _ in self.terms), default=0)

    @property
    def breakpoints(self) -> tuple[Fraction, ...]:
        return tuple(sorted({x for _, r in self.terms for x in r.xs}))

    def value_at_zero(self) -> Fraction:
        return sum((r(0) for (_, m), r in self.terms if m == 0), Fraction(0))

    def numerator(self, M: Optional[int] = None) -> dict[int, PiecewiseLinear]:
        """Coefficients N_j of f * (1 - e^-x)^M = sum N_j(x) e^(jx)."""
        M = self.den_power if M is None else M
        if M < self.den_power:
            raise ValueError("denominator power too small")
        acc: dict[int, PiecewiseLinear] = {}
        for (j, m), r in self.terms:
            for i, b in _d_power(M - m).items():
                t = r.scale(b)
                acc[j + i] = acc[j + i] + t if j + i in acc else t
        return {j: r for j, r in sorted(acc.items()) if not r.is_zero()}

    def normalized(self) -> tuple[int, tuple[tuple[int, PiecewiseLinear], ...]]:
        """Canonical (M, N): f = N / (1 - e^-x)^M with N not divisible by (1 - e^-x)."""
        M = self.den_power
        num = self.numerator(M)
        while M > 0 and num:
            total = _ZERO_PL
            for r in num.values():
                total = total + r
            if not total.is_zero():
                break
            # N(t) / (1 - 1/t): coefficient j is the tail sum of N from j upward
            q: dict[int, PiecewiseLinear] = {}
            run = _ZERO_PL
            for j in sorted(num, reverse=True):
                run = run + num[j]
                if j > min(num):
                    q[j] = run
            num = {j: r for j, r in q.items() if not r.is_zero()}
            M -= 1
        if not num:
            M = 0
        return M, tuple(sorted(num.items()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExpFn):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self) -> int:
        M, num = self.normalized()
        return hash((M, num))

    def is_zero(self) -> bool:
        return not self.numerator()

    def numerator_at(self, xs: Iterable[Fraction], M: Optional[int] = None) -> dict[tuple[Fraction, int], Fraction]:
        """Values N_j(x) of the numerator coefficients at the given points."""
        M = self.den_power if M is None else M
        out: dict[tuple[Fraction, int], Fraction] = {}
        xs = list(xs)
        for (j, m), r in self.terms:
            expand = _d_power(M - m)
            for x in xs:
                v = r(x)
                if not v:
                    continue
                for i, b in expand.items():
                    key = (x, j + i)
                    out[key] = out.get(key, 0) + b * v
        return {k: v for k, v in out.items() if v}

    def zero_on(self, lo: Optional[Fraction], hi: Optional[Fraction]) -> bool:
        bps = self.breakpoints
        if not bps:
            return True
        pts = {x for x in bps if (lo is None or x >= lo) and (hi is None or x <= hi)}
        pts |= {Fraction(x) for x in (lo, hi) if x is not None}
        if lo is None:
            pts.add(bps[0] - 1)
        if hi is None:
            pts.add(bps[-1] + 1)
        return not self.numerator_at(pts)

    def cell_form(self, lo: Optional[Fraction], hi: Optional[Fraction]) -> tuple[int, dict[int, tuple[Fraction, Fraction]]]:
        """(M, {j: (a, b)}) with f = sum (a + b x) e^(jx) / (1 - e^-x)^M on the cell.

        The cell must contain no breakpoint in its interior and must not
        straddle 0.  Terms that vanish on the cell are dropped first, so M
        is 0 on cells touching 0.
        """
        live = [(k, r) for k, r in self.terms if not r.zero_on(lo, hi)]
        M = max((m for (_, m), _ in live), default=0)
        acc: dict[int, list[Fraction]] = {}
        for (j, m), r in live:
            if lo is None or hi is None:
                a, b = r(lo if hi is None else hi), Fraction(0)
            else:
                a, b = r.affine_on(lo, hi)
            for i, c in _d_power(M - m).items():
                slot = acc.setdefault(j + i, [Fraction(0), Fraction(0)])
                slot[0] += c * a
                slot[1] += c * b
        return M, {j: (v[0], v[1]) for j, v in sorted(acc.items()) if v[0] or v[1]}

    def cells(self, F: ClosedSetR) -> list[Segment]:
        """F cut at every breakpoint and at 0, as closed cells."""
        cuts = sorted(set(self.breakpoints) | {Fraction(0)})
        out = []
        for comp in F.components:
            inner = [x for x in cuts if comp.contains(x) and x != comp.lo and x != comp.hi]
            if comp.kind == "point":
                out.append(comp)
                continue
            ends = [comp.lo] + inner + [comp.hi]
            out.extend(Segment(a, b) for a, b in zip(ends, ends[1:]))
        return out

    def pieces(self, F: ClosedSetR) -> list[tuple[Segment, int, dict[int, tuple[Fraction, Fraction]]]]:
        """The piecewise description over F: (cell, M, {j: (a, b)})."""
        return [(c, *self.cell_form(c.lo, c.hi)) for c in self.cells(F)]

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (j, m), r in self.terms:
            fac = f"e^({j}x)" + (f"(1-e^-x)^-{m}" if m else "")
            parts.append(f"{fac}*PL{[(format_rational(x), format_rational(y)) for x, y in r.nodes]}")
        return " + ".join(parts)


def _laurent_of_xi(xi: Mapping[int, int]) -> LaurentPoly:
    return LaurentPoly.from_dict(dict(xi))


# -- elements ------------------------------------------------------------------------

def _clean_xi(xi) -> tuple[tuple[int, int], ...]:
    items = xi.items() if isinstance(xi, Mapping) else xi
    acc: dict[int, int] = {}
    for n, c in items:
        if isinstance(c, bool) or int(c) != c:
            raise ValueError(f"xi entries are integers, got {c!r}")
        acc[int(n)] = acc.get(int(n), 0) + int(c)
    return tuple(sorted((n, c) for n, c in acc.items() if c))


@dataclass(frozen=True, eq=False)
class GZElement:
    """xi (+) f, with f == L(xi) on the window (-window, window)."""

    xi: tuple[tuple[int, int], ...]
    f: ExpFn
    window: Fraction = Fraction(1, 2)

    def __post_init__(self):
        object.__setattr__(self, "xi", _clean_xi(self.xi))
        w = Fraction(self.window)
        if w <= 0:
            raise ValueError("window must be positive")
        object.__setattr__(self, "window", w)
        diff = self.f - ExpFn.laurent_times(_laurent_of_xi(self.xi_dict), PiecewiseLinear.constant(1))
        if not diff.zero_on(-w, w):
            raise ValueError("f does not agree with L(xi) on the window")

    @property
    def xi_dict(self) -> dict[int, int]:
        return dict(self.xi)

    def __add__(self, other: "GZElement") -> "GZElement":
        xi = self.xi_dict
        for n, c in other.xi:
            xi[n] = xi.get(n, 0) + c
        return GZElement(tuple(xi.items()), self.f + other.f, min(self.window, other.window))

    def __neg__(self) -> "GZElement":
        return GZElement(tuple((n, -c) for n, c in self.xi), -self.f, self.window)

    def __sub__(self, other: "GZElement") -> "GZElement":
        return self + (-other)

    def __mul__(self, c: int) -> "GZElement":
        if isinstance(c, bool) or not isinstance(c, int):
            raise TypeError("G_Z elements scale by integers")
        return GZElement(tuple((n, c * v) for n, v in self.xi), self.f.scale(c), self.window)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, GZElement):
            return NotImplemented
        return self.xi == other.xi and self.f == other.f

    def __hash__(self) -> int:
        return hash((self.xi, hash(self.f)))

    def is_zero(self) -> bool:
        return not self.xi and self.f.is_zero()


def combination(coeffs: Sequence[int], elements: Sequence[GZElement]) -> GZElement:
    """sum c_i e_i, built in one pass."""
    xi: dict[int, int] = {}
    terms = []
    window = None
    for c, e in zip(coeffs, elements):
        if not c:
            continue
        for n, v in e.xi:
            xi[n] = xi.get(n, 0) + c * v
        terms.extend((key, r.scale(c)) for key, r in e.f.terms)
        window = e.window if window is None else min(window, e.window)
    return GZElement(tuple(xi.items()), ExpFn(tuple(terms)), window or Fraction(1, 2))


def make_gz_element(B: BundleSpec, h_minus: LaurentPoly, xi, h_plus: LaurentPoly, k: int,
                    g0: Optional[PiecewiseLinear] = None) -> GZElement:
    """h_minus psi_minus + L(xi) psi_mid + h_plus psi_plus + g0, window 1/2k."""
    for name, h in (("h_minus", h_minus), ("h_plus", h_plus)):
        if any(c.denominator != 1 for _, c in h.coeffs):
            raise ValueError(f"{name} must have integer coefficients")
    cut = CutoffTriple.of(k)
    eps = Fraction(1, 2 * k)
    xi = _clean_xi(xi)
    f = (ExpFn.laurent_times(h_minus, cut.minus) + ExpFn.laurent_times(_laurent_of_xi(dict(xi)), cut.mid)
         + ExpFn.laurent_times(h_plus, cut.plus))
    if g0 is not None and not g0.is_zero():
        if g0.nodes[0][1] != 0 or g0.nodes[-1][1] != 0:
            raise ValueError("g0 must have compact support")
        if not g0.zero_on(-eps, eps):
            raise SupportOverlapError(f"g0 is nonzero somewhere in (-{format_rational(eps)}, {format_rational(eps)})")
        f = f + ExpFn.from_pl(g0)
    return GZElement(xi, f, eps)


def order_unit(k: int = 1) -> GZElement:
    """u = delta_0 (+) 1."""
    one = LaurentPoly.const(1)
    return GZElement(((0, 1),), ExpFn.laurent_times(one, PiecewiseLinear.constant(1)), Fraction(1, 2 * k))


def apply_sigma(e: GZElement, times: int = 1) -> GZElement:
    """sigma^times: f -> e^(-times x) f and xi_n -> xi_(n + times)."""
    return GZElement(tuple((n - times, c) for n, c in e.xi), e.f.shift(-times), e.window)


def one_minus_sigma(e: GZElement) -> GZElement:
    return e - apply_sigma(e)


def sigma0(e: GZElement) -> int:
    """Sum of xi, checked against f(0)."""
    s = sum(c for _, c in e.xi)
    if e.f.value_at_zero() != s:
        raise ConsistencyError(f"f(0) = {e.f.value_at_zero()} but sum(xi) = {s}")
    return s


# -- positivity ----------------------------------------------------------------------

@dataclass(frozen=True)
class ElementVerdict:
    kind: str  # "positive", "zero", "not_positive", "unknown"
    witness: Optional[Witness] = None
    resolution: Optional[Fraction] = None

    @property
    def positive(self) -> bool:
        return self.kind == "positive"


def _d_sign(lo: Optional[Fraction], hi: Optional[Fraction], M: int) -> int:
    if M == 0:
        return 1
    if lo is not None and lo >= 0:
        return 1
    return -1 if M % 2 else 1


def _mixed_enclosure(form: dict[int, tuple[Fraction, Fraction]], lo: Fraction, hi: Fraction,
                     bits: int = 64) -> tuple[Fraction, Fraction]:
    tot_lo = tot_hi = Fraction(0)
    for j, (a, b) in form.items():
        v1, v2 = a + b * lo, a + b * hi
        A1, A2 = min(v1, v2), max(v1, v2)
        if j == 0:
            E1 = E2 = Fraction(1)
        elif j > 0:
            E1, E2 = exp_enclosure(j * lo, bits)[0], exp_enclosure(j * hi, bits)[1]
        else:
            E1, E2 = exp_enclosure(j * hi, bits)[0], exp_enclosure(j * lo, bits)[1]
        if A1 >= 0:
            tot_lo += A1 * E1
            tot_hi += A2 * E2
        elif A2 <= 0:
            tot_lo += A1 * E2
            tot_hi += A2 * E1
        else:
            tot_lo += A1 * E2
            tot_hi += A2 * E2
    return tot_lo, tot_hi


def _point_sign_bound(form, x: Fraction, bits: int = 128) -> tuple[Fraction, Fraction]:
    return _mixed_enclosure(form, x, x, bits)


def _cell_verdict(f: ExpFn, cell: Segment, depth: int) -> ElementVerdict:
    M, form = f.cell_form(cell.lo, cell.hi)
    if not form:
        return ElementVerdict("zero")
    s = _d_sign(cell.lo, cell.hi, M)
    form = {j: (s * a, s * b) for j, (a, b) in form.items()}
    if all(b == 0 for _, b in form.values()):
        P = LaurentPoly.from_dict({j: a for j, (a, _) in form.items()})
        v = strictly_positive_on(P, ClosedSetR.of(cell))
        return ElementVerdict(v.kind, v.witness)
    # mixed cells are bounded: outside the outer nodes every r is constant
    lo, hi = cell.lo, cell.hi
    for x in (lo, hi):
        if x == 0:
            if f.value_at_zero() <= 0:
                return ElementVerdict("not_positive", Witness("point", x, x))
        elif _point_sign_bound(form, x)[1] < 0:
            return ElementVerdict("not_positive", Witness("point", x, x))
    stack = [(lo, hi, 0)]
    worst: Optional[Fraction] = None
    evals = 0
    while stack:
        a, b, lvl = stack.pop()
        evals += 1
        if _mixed_enclosure(form, a, b)[0] > 0:
            continue
        mid = (a + b) / 2
        if mid != 0 and _point_sign_bound(form, mid)[1] < 0:
            return ElementVerdict("not_positive", Witness("point", mid, mid))
        if mid == 0 and f.value_at_zero() <= 0:
            return ElementVerdict("not_positive", Witness("point", mid, mid))
        if lvl >= depth or evals > _EVAL_BUDGET:
            worst = b - a if worst is None else max(worst, b - a)
            continue
        stack.append((mid, b, lvl + 1))
        stack.append((a, mid, lvl + 1))
    if worst is not None:
        return ElementVerdict("unknown", resolution=worst)
    return ElementVerdict("positive")


def element_positive(e: GZElement, B: BundleSpec, depth: int = DEFAULT_DEPTH) -> ElementVerdict:
    """Strict positivity of f on F, with IsZero for f == 0 on F.

    Pure exponential cells are decided exactly; cells with a nonconstant
    affine coefficient are bisected at most depth times.
    """
    verdicts = [(c, _cell_verdict(e.f, c, depth)) for c in e.f.cells(B.F)]
    for _, v in verdicts:
        if v.kind == "not_positive":
            return v
    if all(v.kind == "zero" for _, v in verdicts):
        return ElementVerdict("zero")
    for c, v in verdicts:
        if v.kind == "zero":
            x = c.sample()
            return ElementVerdict("not_positive", Witness("point", x, x))
    unknown = [v.resolution for _, v in verdicts if v.kind == "unknown"]
    if unknown:
        return ElementVerdict("unknown", resolution=max(unknown))
    return ElementVerdict("positive")


def verify_element_witness(e: GZElement, B: BundleSpec, w: Witness) -> bool:
    """Independent re-check that f fails strict positivity where w says."""
    if w.kind == "point":
        x = w.x_lo
        if not B.F.contains(x):
            return False
        if x == 0:
            return e.f.value_at_zero() <= 0
        val = _state_value(e.f, x)
        if val.is_exact_zero():
            return True
        return val.enclose(256)[1] < 0
    if w.kind == "root":
        for c in e.f.cells(B.F):
            if c.contains(w.x_lo) and c.contains(w.x_hi):
                M, form = e.f.cell_form(c.lo, c.hi)
                if any(b for _, b in form.values()):
                    return False
                s = _d_sign(c.lo, c.hi, M)
                P = LaurentPoly.from_dict({j: s * a for j, (a, _) in form.items()})
                if verify_witness(P, ClosedSetR.of(c), w):
                    return True
        return False
    return False


# -- states --------------------------------------------------------------------------

@dataclass(frozen=True)
class ExpPolyValue:
    """N(e^beta) / (1 - e^-beta)^M with N a Laurent polynomial, in lowest terms.

    At beta == 0 the value is the rational N(1) with M == 0.  For rational
    beta != 0, e^beta is transcendental, so two values are equal exactly when
    their reduced forms agree.
    """

    beta: Fraction
    numerator: LaurentPoly
    den_power: int = 0

    def __post_init__(self):
        beta = Fraction(self.beta)
        num, M = self.numerator, self.den_power
        if beta == 0:
            num, M = LaurentPoly.const(num.value_at_zero()), 0
        while M > 0 and not num.is_zero() and num.value_at_zero() == 0:
            d = num.as_dict()
            lo = min(d)
            q, run = {}, Fraction(0)
            for j in sorted(d, reverse=True):
                run += d[j]
                if j > lo:
                    q[j] = run
            num = LaurentPoly.from_dict(q)
            M -= 1
        if num.is_zero():
            M = 0
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "den_power", M)

    def times_exp(self, k: int) -> "ExpPolyValue":
        """Multiply by e^(k beta)."""
        return ExpPolyValue(self.beta, self.numerator.shift(k), self.den_power)

    def is_exact_zero(self) -> bool:
        return self.numerator.is_zero()

    def exact(self) -> Optional[Fraction]:
        """The value when it is rational, else None.

        For beta != 0 a reduced N(t)/(1 - 1/t)^M equals a constant r only if
        N = r (1 - 1/t)^M, and reduction forbids M > 0, so N must be constant.
        """
        if self.beta == 0:
            return self.numerator.value_at_zero()
        if self.den_power == 0 and all(n == 0 for n in self.numerator.support):
            return self.numerator.coefficient(0)
        return None

    def enclose(self, bits: int = 64) -> tuple[Fraction, Fraction]:
        v = self.exact()
        if v is not None:
            return v, v
        tl, th = exp_enclosure(self.beta, bits)
        nl, nh = eval_exp_sum(self.numerator.coeffs, tl, th)
        if self.den_power == 0:
            return nl, nh
        # D = 1 - 1/t is monotone in t
        dl, dh = 1 - 1 / tl, 1 - 1 / th
        pl, ph = dl ** self.den_power, dh ** self.den_power
        if self.den_power % 2 == 0 and dl < 0:
            pl, ph = ph, pl
        ql, qh = min(pl, ph), max(pl, ph)
        cands = [nl / ql, nl / qh, nh / ql, nh / qh]
        return min(cands), max(cands)

    def __str__(self) -> str:
        s = str(self.numerator).replace("x)", "b)")
        return s if self.den_power == 0 else f"({s})/(1-e^-b)^{self.den_power}"


def _state_value(f: ExpFn, beta: Fraction) -> ExpPolyValue:
    beta = Fraction(beta)
    if beta == 0:
        return ExpPolyValue(beta, LaurentPoly.const(f.value_at_zero()))
    M = f.den_power
    num = {j: r(beta) for j, r in f.numerator(M).items()}
    return ExpPolyValue(beta, LaurentPoly.from_dict(num), M)


def evaluate_state(e: GZElement, beta, B: Optional[BundleSpec] = None) -> ExpPolyValue:
    """The state at beta applied to e, i.e. f(beta), exactly."""
    beta = Fraction(beta)
    if B is not None and not B.F.contains(beta):
        raise BetaNotInFError(f"{format_rational(beta)} is not in F = {B.F}")
    return _state_value(e.f, beta)


def state_table(e: GZElement, B: BundleSpec, betas: Sequence, bits: int = 64) -> list[tuple[Fraction, Fraction, Fraction]]:
    """(beta, lower, upper) rows for plotting."""
    rows = []
    for b in betas:
        lo, hi = evaluate_state(e, b, B).enclose(bits)
        rows.append((Fraction(b), lo, hi))
    return rows


# -- truncations ---------------------------------------------------------------------

def _bump_sites(F: ClosedSetR, k: int) -> list[tuple[Fraction, Fraction]]:
    """One interval per side of each component, clear of [-1/k, 1/k]."""
    a = Fraction(1, k)
    sites = []
    for c in F.components:
        for side in (1, -1):
            seg = c if side == 1 else c.reflect()
            lo = a if seg.lo is None else max(seg.lo, a)
            if seg.hi is None:
                site = (lo + 1, lo + 2)
            elif seg.hi > lo:
                site = (lo, seg.hi)
            else:
                continue
            sites.append(site if side == 1 else (-site[1], -site[0]))
    return sorted(set(sites))


def truncated_generators(B: BundleSpec, window: int, k: int = 1) -> list[tuple[str, GZElement]]:
    """Generators of the window-w truncation of G_Z, labelled.

    mid[n]: delta_n (+) e^(nx) psi_mid for |n| <= w.
    tail+[n,m], tail-[n,m]: e^(nx) (1 - e^-x)^m psi_plus/minus for |n| + |m| <= w.
    bump[a,b][n,m]: a hat on [a, b] times e^(nx) (1 - e^-x)^m, same range.
    Members that vanish on F are dropped.
    """
    cut = CutoffTriple.of(k)
    eps = Fraction(1, 2 * k)
    out: list[tuple[str, GZElement]] = []
    for n in range(-window, window + 1):
        f = ExpFn.laurent_times(LaurentPoly.monomial(n), cut.mid)
        out.append((f"mid[{n}]", GZElement(((n, 1),), f, eps)))
    pairs = [(n, m) for n in range(-window, window + 1) for m in range(-window, window + 1)
             if abs(n) + abs(m) <= window]
    shapes = [("tail+", cut.plus), ("tail-", cut.minus)]
    shapes += [(f"bump[{format_rational(a)},{format_rational(b)}]", PiecewiseLinear.hat(a, b))
               for a, b in _bump_sites(B.F, k)]
    for name, r in shapes:
        for n, m in pairs:
            f = ExpFn.laurent_times(LaurentPoly.monomial(n), r, m)
            e = GZElement((), f, eps)
            if not _vanishes_on(f, B.F):
                out.append((f"{name}[{n},{m}]", e))
    return out


def _vanishes_on(f: ExpFn, F: ClosedSetR) -> bool:
    for c in f.cells(F):
        if c.kind == "point":
            if c.lo == 0:
                if f.value_at_zero() != 0:
                    return False
            elif not _state_value(f, c.lo).is_exact_zero():
                return False
        elif not f.zero_on(c.lo, c.hi):
            return False
    return True


class _Coords:
    """Injective integer coordinates for the elements restricted to F.

    f is multiplied by (1 - e^-x)^M for one common M, which leaves a sum of
    N_j(x) e^(jx) with piecewise-linear N_j.  On a component of positive
    length the functions x^a e^(jx) are linearly independent, so the values
    of every N_j at all breakpoints (and the component ends) pin f down.  At
    an isolated point p != 0, e^p is transcendental and the values N_j(p)
    are again independent; at p == 0 only f(0) is seen.
    """

    def __init__(self, F: ClosedSetR, elements: Iterable[GZElement]):
        elements = list(elements)
        self.F = F
        self.M = max((e.f.den_power for e in elements), default=0)
        nodes = sorted({x for e in elements for x in e.f.breakpoints})
        self.samples: list[list[Fraction]] = []
        for c in F.components:
            if c.kind == "point":
                self.samples.append([c.lo])
                continue
            pts = {x for x in nodes if c.contains(x)}
            pts |= {x for x in (c.lo, c.hi) if x is not None}
            if not pts:
                pts = {Fraction(0)}
            self.samples.append(sorted(pts))
        self._keys: dict = {}

    def raw(self, e: GZElement) -> dict:
        out: dict = {("xi", n): Fraction(c) for n, c in e.xi}
        for i, (c, pts) in enumerate(zip(self.F.components, self.samples)):
            if c.kind == "point" and c.lo == 0:
                v = e.f.value_at_zero()
                if v:
                    out[("f0", i)] = v
                continue
            for (x, j), v in e.f.numerator_at(pts, self.M).items():
                out[("f", i, x, j)] = v
        return out

    @staticmethod
    def dense(raws: Sequence[dict]) -> tuple[list[list[int]], list]:
        keys = sorted({k for r in raws for k in r}, key=repr)
        den = lcm_all(v.denominator for r in raws for v in r.values())
        rows = [[int(r.get(k, 0) * den) for k in keys] for r in raws]
        return rows, keys


def _dedup(labelled: Iterable[tuple[str, GZElement]], coords: _Coords) -> list[tuple[str, GZElement, dict]]:
    seen = set()
    out = []
    for lab, e in labelled:
        raw = coords.raw(e)
        key = tuple(sorted(raw.items(), key=repr))
        if key in seen or not raw:
            continue
        seen.add(key)
        out.append((lab, e, raw))
    return out


def _orbit(family: Sequence[tuple[str, GZElement]], radius: int) -> list[tuple[str, GZElement]]:
    out = []
    for lab, e in family:
        for j in range(-radius, radius + 1):
            out.append((lab if j == 0 else f"sigma^{j}({lab})", apply_sigma(e, j) if j else e))
    return out


def _labelled(family) -> list[tuple[str, GZElement]]:
    out = []
    for i, item in enumerate(family):
        if isinstance(item, tuple):
            out.append(item)
        else:
            out.append((f"family[{i}]", item))
    return out


@dataclass
class KernelImageReport:
    window: int
    members: int
    subset_ok: bool
    subset_failures: list[str] = field(default_factory=list)
    kernel_members: int = 0
    resolved: list[tuple[str, int]] = field(default_factory=list)  # (label, max |coefficient|)
    failures: list[str] = field(default_factory=list)
    unresolved: list[str] = field(default_factory=list)
    candidates: int = 0

    @property
    def ok(self) -> bool:
        return self.subset_ok and not self.failures and not self.unresolved


def _candidates(B: BundleSpec, family: list[tuple[str, GZElement]], window: int, k: int) -> list[tuple[str, GZElement]]:
    """The sigma-orbit of the family and the window + 1 generators."""
    return truncated_generators(B, window + 1, k) + _orbit(family, 1)


def verify_kernel_image(family, B: BundleSpec, window: int, k: int = 1) -> KernelImageReport:
    """(id - sigma)(G_Z) == ker(Sigma_0), checked on a truncation.

    Inclusion "subset": Sigma_0((id - sigma) e) == 0 exactly for every family
    member e.  Both maps are additive, so this covers the whole Z-span.
    Inclusion "superset": each member with Sigma_0 == 0 is written as
    (id - sigma)(e') by an exact integer solve, e' ranging over the Z-span of
    the sigma-orbit of the family together with the generators at window + 1;
    the result is re-checked on F.  Pass family=None for the generators at
    the given window.
    """
    fam = truncated_generators(B, window, k) if family is None else _labelled(family)
    rep = KernelImageReport(window=window, members=len(fam), subset_ok=True)
    for lab, e in fam:
        d = one_minus_sigma(e)
        try:
            if sigma0(d) != 0:
                rep.subset_failures.append(lab)
        except ConsistencyError:
            rep.subset_failures.append(lab)
    rep.subset_ok = not rep.subset_failures
    targets = []
    for lab, e in fam:
        if sigma0(e) == 0:
            targets.append((lab, e))
    rep.kernel_members = len(targets)
    if not targets:
        return rep
    cands = _candidates(B, fam, window, k)
    images = [(lab, one_minus_sigma(e)) for lab, e in cands]
    coords = _Coords(B.F, [e for _, e in fam] + [e for _, e in cands] + [e for _, e in images])
    raws_t = [coords.raw(e) for _, e in targets]
    pairs = [(c, im, coords.raw(im[1])) for c, im in zip(cands, images)]
    seen, rows_raw, kept = set(), [], []
    for c, im, raw in pairs:
        key = tuple(sorted(raw.items(), key=repr))
        if not raw or key in seen:
            continue
        seen.add(key)
        rows_raw.append(raw)
        kept.append(c)
    rep.candidates = len(kept)
    mats, keys = _Coords.dense(rows_raw + raws_t)
    rows, tvecs = mats[:len(rows_raw)], mats[len(rows_raw):]
    sols = integer_solutions(rows, len(keys), tvecs)
    for (lab, e), sol, raw in zip(targets, sols, raws_t):
        if not raw:
            rep.resolved.append((lab, 0))
            continue
        if sol is None:
            rep.unresolved.append(lab)
            continue
        pre = combination(sol, [g for _, g in kept])
        if coords.raw(one_minus_sigma(pre)) != raw:
            rep.failures.append(lab)
        else:
            rep.resolved.append((lab, max(abs(c) for c in sol)))
    return rep


@dataclass
class K0Report:
    window: int
    free_rank: int
    torsion: list[int]
    class_of_u: Optional[int]
    module_rank: int
    relations: int

    @property
    def answer(self) -> tuple[int, list[int], Optional[int]]:
        return self.free_rank, self.torsion, self.class_of_u


def _k0_once(B: BundleSpec, family, window: int, k: int) -> K0Report:
    if family is None:
        gens = truncated_generators(B, window, k)
        bigger = truncated_generators(B, window + 1, k)
    else:
        fam = _labelled(family)
        gens = _orbit(fam, window)
        bigger = _orbit(fam, window + 1)
    u = order_unit(k)
    rels = [(lab, one_minus_sigma(e)) for lab, e in bigger]
    coords = _Coords(B.F, [e for _, e in gens] + [e for _, e in bigger] + [e for _, e in rels] + [u])
    g_raw = [coords.raw(e) for _, e in gens]
    r_raw = [r for r in (coords.raw(e) for _, e in rels) if r]
    u_raw = coords.raw(u)
    mats, keys = _Coords.dense(g_raw + r_raw + [u_raw])
    G, R, uvec = mats[:len(g_raw)], mats[len(g_raw):len(g_raw) + len(r_raw)], mats[-1]
    # K0 = M_w / (M_w cap R) = (M_w + R) / R
    basis = lattice_basis(G + R, len(keys))
    r = len(basis)

    def coords_in(v) -> list[int]:
        y = solve_echelon_int(basis, v)
        if y is None:
            raise ArithmeticError("vector outside the module")
        return y

    rc = [coords_in(v) for v in R]
    rc = [c for c in rc if any(c)]
    if rc:
        _, S, V = smith_normal_form(IntegerMatrix.from_rows(rc, r))
        diag = [S[i, i] for i in range(min(S.rows, S.cols))]
        Vl = V.tolist()
    else:
        diag, Vl = [], [[int(i == j) for j in range(r)] for i in range(r)]
    nz = [d for d in diag if d]
    free = r - len(nz)
    torsion = [d for d in nz if d > 1]
    cls: Optional[int] = None
    if free == 1 and any(uvec):
        # rows of S V span the relations; in coordinates y = x V^-1 the
        # free part is the last coordinate
        xu = coords_in(uvec)
        y = _solve_square(Vl, xu)
        last = y[-1]
        # orient the generator so that Sigma_0 is positive on it
        gen = [sum(Vl[-1][i] * basis[i][j] for i in range(r)) for j in range(len(keys))]
        s0 = _sigma0_of_vector(gen, keys, coords)
        if s0 != 0:
            cls = int(last) * (1 if s0 > 0 else -1)
    return K0Report(window, free, torsion, cls, r, len(rc))


def _solve_square(V: list[list[int]], x: list[int]) -> list[Fraction]:
    """y with y @ V == x for square invertible V."""
    n = len(V)
    # solve V^T y^T = x^T by Gauss-Jordan
    A = [[Fraction(V[j][i]) for j in range(n)] + [Fraction(x[i])] for i in range(n)]
    for c in range(n):
        p = next(i for i in range(c, n) if A[i][c] != 0)
        A[c], A[p] = A[p], A[c]
        pv = A[c][c]
        A[c] = [v / pv for v in A[c]]
        for i in range(n):
            if i != c and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[c])]
    return [A[i][n] for i in range(n)]


def _sigma0_of_vector(v: list[int], keys: list, coords: _Coords) -> int:
    return sum(x for x, key in zip(v, keys) if key[0] == "xi")


def k0_crossed_product(family, B: BundleSpec, window: int, k: int = 1, check_next: bool = True) -> tuple[int, list[int], Optional[int], list[K0Report]]:
    """Cokernel of id - sigma on the window-w truncation, via Smith normal form.

    The truncated module M_w is spanned by the generators at window w (or the
    sigma-orbit of radius w of a given family), and the relations are the
    images (id - sigma)(g) of everything at window w + 1, so the answer is
    M_w / (M_w cap (id - sigma)M_(w+1)).  With check_next the computation
    is repeated at window + 1 and both runs are returned for comparison.
    """
    runs = [_k0_once(B, family, window, k)]
    if check_next:
        runs.append(_k0_once(B, family, window + 1, k))
    first = runs[0]
    return first.free_rank, first.torsion, first.class_of_u, runs


def sigma_simplicity_probe(g: GZElement, B: BundleSpec, bounds: tuple[int, int] = (4, 8),
                           depth: int = DEFAULT_DEPTH) -> Optional[tuple[int, int]]:
    """Smallest (n, m) in the bounds with m * sum_{|j|<=n} sigma^j(g) - u > 0 on F, or None."""
    if not element_positive(g, B, depth).positive:
        raise NotPositiveError("the probe needs a strictly positive element")
    n_max, m_max = bounds
    k = max(1, int(Fraction(1, 2) / g.window) if g.window <= Fraction(1, 2) else 1)
    u = order_unit(k)
    for n in range(n_max + 1):
        orbit = g
        for j in range(1, n + 1):
            orbit = orbit + apply_sigma(g, j) + apply_sigma(g, -j)
        for m in range(1, m_max + 1):
            if element_positive(orbit * m - u, B, depth).positive:
                return n, m
    return None


# -- JSON ------------------------------------------------------------------------------

def bundle_to_json(B: BundleSpec) -> dict:
    return {"F": closed_set_to_json(B.F)}


def bundle_from_json(obj) -> BundleSpec:
    if not isinstance(obj, dict) or "F" not in obj:
        raise ValueError("a bundle is {\"F\": closed set}")
    return BundleSpec(closed_set_from_json(obj["F"]))


def element_to_json(e: GZElement) -> dict:
    return {
        "xi": [[n, c] for n, c in e.xi],
        "window": format_rational(e.window),
        "terms": [[j, m, r.to_json()] for (j, m), r in e.f.terms],
    }


def element_from_json(obj) -> GZElement:
    """Either the raw form of element_to_json or {"make": {...}} for make_gz_element."""
    from .laurent import laurent_from_json
    if not isinstance(obj, dict):
        raise ValueError("an element is a JSON object")
    if "make" in obj:
        spec = obj["make"]
        B = BundleSpec(ClosedSetR.of(Segment(None, None)))
        zero = LaurentPoly()
        hm = laurent_from_json(spec["h_minus"]) if "h_minus" in spec else zero
        hp = laurent_from_json(spec["h_plus"]) if "h_plus" in spec else zero
        g0 = PiecewiseLinear.from_json(spec["g0"]) if spec.get("g0") else None
        return make_gz_element(B, hm, [(int(n), int(c)) for n, c in spec.get("xi", [])], hp,
                               int(spec.get("k", 1)), g0)
    terms = []
    for j, m, nodes in obj.get("terms", []):
        terms.append(((int(j), int(m)), PiecewiseLinear.from_json(nodes)))
    return GZElement(tuple((int(n), int(c)) for n, c in obj.get("xi", [])), ExpFn(tuple(terms)),
                     parse_rational(obj.get("window", "1/2")))
