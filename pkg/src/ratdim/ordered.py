"""Finitely generated partially ordered abelian groups inside Q^k.

A group is a SubgroupPresentation (the carrier) together with a cone.  Cones
are either polyhedral (coordinatewise, or a list of halfspaces) and then
intersected with the carrier, or an explicit numerical semigroup on Z such
as S_n = {0, n, n+1, ...}.

Questions about infinite groups are answered by bounded search.  Element
windows: coordinates r_i in a fixed Z-basis of the carrier with |r_i| <= w,
and denominators d <= w allowed by the carrier's modulus.  Enumeration is by
d first, then lexicographic in the numerators.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import gcd
from typing import Iterator, Optional, Sequence, Union

from . import polyhedra
from .lattice import (
    IntegerMatrix,
    SubgroupPresentation,
    order_modulo,
    same_group,
    snf_diagonal,
    subgroup_from_json,
    subgroup_intersection,
    subgroup_membership,
    subgroup_to_json,
)
from .supernatural import (
    SupernaturalNumber,
    divides,
    format_rational,
    parse_rational,
    relatively_prime,
)

__all__ = [
    "Coordinatewise",
    "Halfspaces",
    "ExplicitSubset",
    "OrderedGroupSpec",
    "UnperforationVerdict",
    "PreconditionError",
    "NonCoprimeError",
    "DEFAULT_WINDOW",
    "is_torsion_free",
    "is_unperforated",
    "tensor_localize",
    "localization_intersection_contains",
    "riesz_interpolate_fg",
    "riesz_decompose",
    "matrix_dimension_range_level",
    "dimension_drop_k0",
    "DimensionDropReport",
    "order_ideal_closure",
    "compare_orders",
    "cone_contains",
    "leq",
    "window_elements",
    "integers",
    "integers_with_threshold",
    "coordinatewise_lattice",
    "coprime_rip_counterexample",
    "ordered_group_from_json",
    "ordered_group_to_json",
]

DEFAULT_WINDOW = 10

Vector = tuple[Fraction, ...]


class PreconditionError(ValueError):
    pass


class NonCoprimeError(ValueError):
    pass


# -- cones ------------------------------------------------------------------

@dataclass(frozen=True)
class Coordinatewise:
    pass


@dataclass(frozen=True)
class Halfspaces:
    functionals: tuple[Vector, ...]

    def __post_init__(self):
        object.__setattr__(self, "functionals", tuple(tuple(Fraction(x) for x in f) for f in self.functionals))


@dataclass(frozen=True)
class ExplicitSubset:
    """Numerical semigroup on Z generated by positive integers with gcd 1."""

    generators: tuple[int, ...]

    def __post_init__(self):
        gens = tuple(sorted(set(int(g) for g in self.generators)))
        if not gens or gens[0] < 1:
            raise ValueError("explicit cone generators must be positive integers")
        g = 0
        for x in gens:
            g = gcd(g, x)
        if g != 1:
            raise ValueError("explicit cone generators must have gcd 1")
        object.__setattr__(self, "generators", gens)

    @classmethod
    def threshold(cls, n: int) -> "ExplicitSubset":
        """S_n = {0, n, n+1, ...}."""
        if n < 1:
            raise ValueError("threshold must be positive")
        return cls(tuple(range(n, 2 * n)))

    def conductor(self) -> int:
        """Least c with every integer >= c in the semigroup."""
        m = self.generators[0]
        member = [True]
        run, j = (1 if m == 1 else 0), 0
        while run < m:
            j += 1
            ok = any(j >= g and member[j - g] for g in self.generators)
            member.append(ok)
            run = run + 1 if ok else 0
        return j - m + 1

    def contains_int(self, j: int) -> bool:
        if j < 0:
            return False
        if j >= self.conductor():
            return True
        member = [True] + [False] * j
        for t in range(1, j + 1):
            member[t] = any(t >= g and member[t - g] for g in self.generators)
        return member[j]


ConeSpec = Union[Coordinatewise, Halfspaces, ExplicitSubset]


@dataclass(frozen=True)
class OrderedGroupSpec:
    """Carrier plus cone.  `relations` turns the carrier generators into an
    abstract presentation; only torsion questions read it."""

    carrier: SubgroupPresentation
    cone: ConeSpec
    relations: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        k = self.carrier.rank
        if isinstance(self.cone, Halfspaces):
            for f in self.cone.functionals:
                if len(f) != k:
                    raise ValueError(f"functional {f} has length {len(f)}, carrier rank is {k}")
        if isinstance(self.cone, ExplicitSubset) and k != 1:
            raise ValueError("explicit cones live on rank one carriers")
        for r in self.relations:
            if len(r) != len(self.carrier.generators):
                raise ValueError("relation length must match the number of generators")

    @property
    def rank(self) -> int:
        return self.carrier.rank

    def is_polyhedral(self) -> bool:
        return not isinstance(self.cone, ExplicitSubset)

    def functionals(self) -> list[Vector]:
        if isinstance(self.cone, Coordinatewise):
            k = self.rank
            return [tuple(Fraction(int(i == j)) for j in range(k)) for i in range(k)]
        if isinstance(self.cone, Halfspaces):
            return list(self.cone.functionals)
        raise TypeError("explicit cones are not polyhedral")

    def is_partially_ordered(self, window: int = DEFAULT_WINDOW) -> bool:
        """cone cap -cone == {0} among window elements."""
        return not any(any(g) and cone_contains(self, g) and cone_contains(self, _neg(g))
                       for g in window_elements(self, window))


def _vec(v) -> Vector:
    if isinstance(v, (int, Fraction)):
        return (Fraction(v),)
    return tuple(Fraction(x) for x in v)


def _neg(v: Vector) -> Vector:
    return tuple(-x for x in v)


def _sub(a: Vector, b: Vector) -> Vector:
    return tuple(x - y for x, y in zip(a, b))


def _add(a: Vector, b: Vector) -> Vector:
    return tuple(x + y for x, y in zip(a, b))


def _scale(c, a: Vector) -> Vector:
    return tuple(c * x for x in a)


def _dot(a: Sequence, b: Sequence) -> Fraction:
    return sum((Fraction(x) * y for x, y in zip(a, b)), Fraction(0))


def cone_contains(G: OrderedGroupSpec, x) -> bool:
    """x in G^+ (x must also lie in the carrier)."""
    x = _vec(x)
    if not subgroup_membership(x, G.carrier):
        return False
    if isinstance(G.cone, ExplicitSubset):
        v = x[0]
        if v == 0:
            return True
        if v < 0:
            return False
        m = G.carrier.modulus
        if m.is_infinite():
            # v = (v / s) * s with s a large p-power multiple in S, p^inf | m
            return True
        j = v * m.finite_value()
        return j.denominator == 1 and G.cone.contains_int(int(j))
    return all(_dot(f, x) >= 0 for f in G.functionals())


def leq(G: OrderedGroupSpec, a, b) -> bool:
    return cone_contains(G, _sub(_vec(b), _vec(a)))


# -- windows ----------------------------------------------------------------

def _denominators(G: OrderedGroupSpec, window: int) -> list[int]:
    return [d for d in range(1, window + 1) if divides(d, G.carrier.modulus)]


def _basis(G: OrderedGroupSpec) -> list[Vector]:
    return G.carrier.basis()


def _combine(basis: list[Vector], r: Sequence[Fraction], k: int) -> Vector:
    out = [Fraction(0)] * k
    for c, b in zip(r, basis):
        if c:
            for j in range(k):
                out[j] += c * b[j]
    return tuple(out)


def window_elements(G: OrderedGroupSpec, window: int) -> Iterator[Vector]:
    """All carrier elements of the window in canonical order, each once."""
    basis = _basis(G)
    k, n = G.rank, len(basis)
    if n == 0:
        yield tuple(Fraction(0) for _ in range(k))
        return
    for d in _denominators(G, window):
        rng = range(-window * d, window * d + 1)
        for c in product(rng, repeat=n):
            g = 0
            for x in c:
                g = gcd(g, x)
            if gcd(g, d) != 1:
                continue
            yield _combine(basis, [Fraction(x, d) for x in c], k)


def _polyhedral_search(G: OrderedGroupSpec, window: int, lower: list[Vector], upper: list[Vector]) -> Iterator[Vector]:
    """Window elements a with l <= a for l in lower and a <= u for u in upper."""
    basis = _basis(G)
    k, n = G.rank, len(basis)
    if n == 0:
        z = tuple(Fraction(0) for _ in range(k))
        if all(leq(G, l, z) for l in lower) and all(leq(G, z, u) for u in upper):
            yield z
        return
    cons: list[polyhedra.Constraint] = []
    for f in G.functionals():
        fb = tuple(_dot(f, b) for b in basis)
        for l in lower:
            cons.append((fb, _dot(f, l)))
        for u in upper:
            cons.append((tuple(-x for x in fb), -_dot(f, u)))
    cons += polyhedra.box(n, Fraction(window))
    for d in _denominators(G, window):
        for r in polyhedra.grid_points(cons, n, d):
            if d > 1:
                g = 0
                for x in r:
                    g = gcd(g, int(x * d))
                if gcd(g, d) != 1:
                    continue  # already met with a smaller denominator
            yield _combine(basis, r, k)


def _search(G: OrderedGroupSpec, window: int, lower: list[Vector], upper: list[Vector]) -> Iterator[Vector]:
    if G.is_polyhedral():
        yield from _polyhedral_search(G, window, lower, upper)
        return
    for a in window_elements(G, window):
        if all(leq(G, l, a) for l in lower) and all(leq(G, a, u) for u in upper):
            yield a


# -- structural questions ------------------------------------------------------

def is_torsion_free(G: OrderedGroupSpec) -> bool:
    """Subgroups of Q^k are torsion free; an abstract presentation Z^m / R is
    torsion free iff the Smith form of R has no diagonal entry above 1."""
    if not G.relations:
        return True
    m = len(G.carrier.generators)
    diag = snf_diagonal(IntegerMatrix.from_rows([list(r) for r in G.relations], m))
    return all(d in (0, 1) for d in diag)


@dataclass(frozen=True)
class UnperforationVerdict:
    kind: str  # "true", "false_with_witness", "true_within_window"
    witness: Optional[tuple[Vector, int]] = None
    window: Optional[int] = None

    @property
    def holds(self) -> bool:
        return self.kind != "false_with_witness"


def is_unperforated(G: OrderedGroupSpec, window: int = DEFAULT_WINDOW) -> UnperforationVerdict:
    if window < 1:
        raise ValueError("window must be positive")
    if G.is_polyhedral() and is_torsion_free(G):
        # n f(g) >= 0 implies f(g) >= 0 for every functional f
        return UnperforationVerdict("true")
    for g in window_elements(G, window):
        if cone_contains(G, g):
            continue
        for n in range(2, window + 1):
            if cone_contains(G, _scale(n, g)):
                return UnperforationVerdict("false_with_witness", (g, n))
    return UnperforationVerdict("true_within_window", window=window)


def tensor_localize(G: OrderedGroupSpec, m: SupernaturalNumber) -> OrderedGroupSpec:
    """G tensor D_m, realized as the D_m-span of the same generators.

    The cone is the saturation by D_m^+; for polyhedral cones that is the
    same halfspace system on the bigger carrier, and for explicit cones
    `cone_contains` reads the modulus directly.
    """
    if not is_torsion_free(G):
        raise PreconditionError("tensor_localize needs a torsion free group")
    return OrderedGroupSpec(G.carrier.with_modulus(G.carrier.modulus * m), G.cone)


def localization_intersection_contains(G: SubgroupPresentation, p: SupernaturalNumber,
                                       q: SupernaturalNumber, x) -> bool:
    """x in (G tensor D_p) cap (G tensor D_q), for relatively prime p and q.

    Membership on both sides means k x, l x in G with k | p, l | q.  Then
    gcd(k, l) = 1 and x = a k x + b l x lies in G.
    """
    if not relatively_prime(p, q):
        raise NonCoprimeError(f"{p} and {q} share a prime")
    x = _vec(x)
    k = order_modulo(x, G)
    if k is None:
        return False
    in_p = divides(k, G.modulus * p)
    in_q = divides(k, G.modulus * q)
    both = in_p and in_q
    if G.modulus.is_one():
        assert both == (k == 1)
    return both


# -- interpolation ---------------------------------------------------------------

def _check_pairs(G: OrderedGroupSpec, ps: list[Vector], qs: list[Vector]) -> None:
    for i, p in enumerate(ps):
        for j, q in enumerate(qs):
            if not leq(G, p, q):
                raise PreconditionError(f"p{i} <= q{j} fails")


def riesz_interpolate_fg(G: OrderedGroupSpec, p0, p1, q0, q1, window: int = DEFAULT_WINDOW) -> Optional[Vector]:
    """Some a with p_i <= a <= q_j among window elements, else None."""
    ps = [_vec(p0), _vec(p1)]
    qs = [_vec(q0), _vec(q1)]
    for name, v in zip(("p0", "p1", "q0", "q1"), ps + qs):
        if not subgroup_membership(v, G.carrier):
            raise PreconditionError(f"{name} is not in the group")
    _check_pairs(G, ps, qs)
    for p in ps:
        for q in qs:
            if p == q:
                return p
    return next(_search(G, window, ps, qs), None)


def riesz_decompose(G: OrderedGroupSpec, x, a0, a1, window: int = DEFAULT_WINDOW) -> Optional[tuple[Vector, Vector]]:
    """x = x0 + x1 with 0 <= x_i <= a_i, by interpolating {x - a1, 0} <= y <= {a0, x}."""
    x, a0, a1 = _vec(x), _vec(a0), _vec(a1)
    for name, v in (("x", x), ("a0", a0), ("a1", a1)):
        if not cone_contains(G, v):
            raise PreconditionError(f"{name} is not positive")
    if not leq(G, x, _add(a0, a1)):
        raise PreconditionError("x <= a0 + a1 fails")
    zero = tuple(Fraction(0) for _ in x)
    y = riesz_interpolate_fg(G, _sub(x, a1), zero, a0, x, window)
    if y is None:
        return None
    return y, _sub(x, y)


def matrix_dimension_range_level(G: OrderedGroupSpec, u, n: int, window: int = DEFAULT_WINDOW) -> list[Vector]:
    """Positive window elements g with g <= n u, sorted by coordinates."""
    u = _vec(u)
    if not cone_contains(G, u):
        raise PreconditionError("u is not positive")
    zero = tuple(Fraction(0) for _ in u)
    return sorted(set(_search(G, window, [zero], [_scale(n, u)])))


# -- the dimension drop computation ------------------------------------------------

@dataclass
class DimensionDropReport:
    ok: bool
    intersection: Optional[SubgroupPresentation]
    result: Optional[OrderedGroupSpec]
    checks: list[tuple[str, bool, str]] = field(default_factory=list)


TWO_INF = SupernaturalNumber.infinite_power(2)
THREE_INF = SupernaturalNumber.infinite_power(3)


def dimension_drop_k0(G: OrderedGroupSpec, window: int = 4) -> DimensionDropReport:
    """Image(iota0) cap Image(iota1) inside G tensor D_2inf tensor D_3inf.

    The two images are the D_2inf- and D_3inf-spans of G's generators; their
    intersection is computed by the coprime-multiple criterion and compared
    with G through Psi(g) = g tensor 1 tensor 1, generator by generator for
    the groups and element by element on a window for the cones.
    """
    checks: list[tuple[str, bool, str]] = []
    if not G.carrier.is_z_span():
        raise ValueError("dimension_drop_k0 expects a Z-span carrier")
    tf = is_torsion_free(G)
    unp = is_unperforated(G)
    checks.append(("torsion_free", tf, ""))
    checks.append(("unperforated", unp.holds,
                   "" if unp.holds else f"{_fmt(unp.witness[1])} * {_fmt(unp.witness[0])} >= 0"))
    if not (tf and unp.holds):
        return DimensionDropReport(False, None, None, checks)

    image0 = G.carrier.with_modulus(TWO_INF)
    image1 = G.carrier.with_modulus(THREE_INF)
    inter = subgroup_intersection(image0, image1)
    tensor = tensor_localize(G, TWO_INF * THREE_INF)
    result = OrderedGroupSpec(inter, G.cone)

    for idx, g in enumerate(G.carrier.generators):
        ok = subgroup_membership(g, inter)
        checks.append((f"psi(g{idx}) in intersection", ok, _fmt(g)))
    for idx, x in enumerate(inter.generators):
        ok = subgroup_membership(x, G.carrier)
        checks.append((f"intersection generator {idx} in psi(G)", ok, _fmt(x)))
    checks.append(("psi is onto", same_group(inter, G.carrier), ""))

    mismatches = []
    count = 0
    for g in window_elements(G, window):
        count += 1
        if cone_contains(G, g) != cone_contains(tensor, g):
            mismatches.append(g)
    checks.append(("psi(G+) = psi(G) cap tensor cone", not mismatches,
                   f"{count} window elements" if not mismatches else f"mismatch at {_fmt(mismatches[0])}"))
    ok = all(c[1] for c in checks)
    return DimensionDropReport(ok, inter, result, checks)


# -- order ideals ----------------------------------------------------------------

def order_ideal_closure(G: OrderedGroupSpec, S: Sequence, window: int = DEFAULT_WINDOW) -> SubgroupPresentation:
    """Smallest hereditary, directed subgroup containing S, within the window.

    Repeats until stable: add every positive g <= h for positive h of the
    current subgroup in the window, and make each generator a difference of
    positive elements by adding the first window element above both it and 0.
    """
    k = G.rank
    gens: list[Vector] = [_vec(s) for s in S if any(_vec(s))]
    for s in gens:
        if not subgroup_membership(s, G.carrier):
            raise PreconditionError(f"{_fmt(s)} is not in the group")
    elements = list(window_elements(G, window))
    positives = [g for g in elements if cone_contains(G, g)]

    def current() -> SubgroupPresentation:
        return SubgroupPresentation(k, tuple(gens) if gens else (), G.carrier.modulus)

    changed = True
    while changed:
        changed = False
        ideal = current()
        # directedness
        for s in list(gens):
            if cone_contains(G, s) or cone_contains(G, _neg(s)):
                continue
            h = next((e for e in positives if leq(G, s, e) and subgroup_membership(e, ideal)), None)
            if h is None:
                h = next((e for e in positives if leq(G, s, e)), None)
                if h is not None:
                    gens.append(h)
                    changed = True
                    ideal = current()
        # heredity
        tops = [h for h in positives if any(h) and subgroup_membership(h, ideal)]
        for g in positives:
            if subgroup_membership(g, ideal):
                continue
            if any(leq(G, g, h) for h in tops):
                gens.append(g)
                changed = True
                ideal = current()
                tops = [h for h in positives if any(h) and subgroup_membership(h, ideal)]
    out = current()
    if not out.generators:
        return SubgroupPresentation(k, (), G.carrier.modulus)
    return SubgroupPresentation(k, tuple(out.basis()), G.carrier.modulus)


def compare_orders(G: OrderedGroupSpec, H: OrderedGroupSpec, window: int = DEFAULT_WINDOW) -> tuple[bool, Optional[Vector]]:
    """Identity map G -> H as an order isomorphism: same carrier, and the two
    cones agree on every window element of G.  Returns (ok, first mismatch)."""
    if not same_group(G.carrier, H.carrier):
        return False, None
    for g in window_elements(G, window):
        if cone_contains(G, g) != cone_contains(H, g):
            return False, g
    return True, None


# -- stock groups -----------------------------------------------------------------

def integers(modulus: SupernaturalNumber | None = None) -> OrderedGroupSpec:
    return OrderedGroupSpec(SubgroupPresentation.standard(1, modulus), Coordinatewise())


def integers_with_threshold(n: int) -> OrderedGroupSpec:
    """(Z, S_n)."""
    return OrderedGroupSpec(SubgroupPresentation.standard(1), ExplicitSubset.threshold(n))


def coordinatewise_lattice(k: int, modulus: SupernaturalNumber | None = None) -> OrderedGroupSpec:
    return OrderedGroupSpec(SubgroupPresentation.standard(k, modulus), Coordinatewise())


def coprime_rip_counterexample(p: int) -> tuple[OrderedGroupSpec, dict[str, Vector]]:
    """G = Z a1 + Z b1 in (Q^2, coordinatewise) with a1 = (1/p, 1/p - 1),
    b1 = (1/p, 1/p); returns G and the points a0, a1, b0, b1."""
    a0 = (Fraction(0), Fraction(0))
    b0 = (Fraction(1), Fraction(0))
    a1 = (Fraction(1, p), Fraction(1, p) - 1)
    b1 = (Fraction(1, p), Fraction(1, p))
    G = OrderedGroupSpec(SubgroupPresentation(2, (a1, b1)), Coordinatewise())
    return G, {"a0": a0, "a1": a1, "b0": b0, "b1": b1}


# -- JSON ------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (int, Fraction)):
        return format_rational(v)
    return "(" + ", ".join(format_rational(x) for x in v) + ")"


def ordered_group_to_json(G: OrderedGroupSpec) -> dict:
    if isinstance(G.cone, Coordinatewise):
        cone = {"type": "coordinatewise"}
    elif isinstance(G.cone, Halfspaces):
        cone = {"type": "halfspaces", "functionals": [[format_rational(x) for x in f] for f in G.cone.functionals]}
    else:
        cone = {"type": "explicit", "generators": list(G.cone.generators)}
    out = {"carrier": subgroup_to_json(G.carrier), "cone": cone}
    if G.relations:
        out["relations"] = [list(r) for r in G.relations]
    return out


def ordered_group_from_json(obj) -> OrderedGroupSpec:
    if not isinstance(obj, dict) or "carrier" not in obj or "cone" not in obj:
        raise ValueError("ordered group needs 'carrier' and 'cone'")
    carrier = subgroup_from_json(obj["carrier"])
    c = obj["cone"]
    kind = c.get("type") if isinstance(c, dict) else None
    if kind == "coordinatewise":
        cone: ConeSpec = Coordinatewise()
    elif kind == "halfspaces":
        cone = Halfspaces(tuple(tuple(parse_rational(x) for x in f) for f in c["functionals"]))
    elif kind == "explicit":
        if "threshold" in c:
            cone = ExplicitSubset.threshold(int(c["threshold"]))
        else:
            cone = ExplicitSubset(tuple(int(x) for x in c["generators"]))
    else:
        raise ValueError(f"unknown cone type {kind!r}")
    rel = tuple(tuple(int(x) for x in r) for r in obj.get("relations", []))
    return OrderedGroupSpec(carrier, cone, rel)

