"""Exact integer and rational lattice algebra.

Hermite and Smith normal forms over Z, plus membership, intersection and
quotient invariants for finitely generated subgroups of Q^k whose
coefficients are allowed denominators from a supernatural number.
Everything is plain Python ints and Fractions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .supernatural import (
    INF,
    SupernaturalNumber,
    divides,
    format_rational,
    lcm_all,
    parse_rational,
    relatively_prime,
    supernatural_from_json,
    supernatural_to_json,
)

__all__ = [
    "IntegerMatrix",
    "SubgroupPresentation",
    "DimensionMismatchError",
    "IncompatibleModuliError",
    "NotASubgroupError",
    "smith_normal_form",
    "hermite_normal_form",
    "left_kernel",
    "lattice_basis",
    "integer_solutions",
    "solve_echelon_int",
    "subgroup_membership",
    "subgroup_intersection",
    "quotient_invariants",
    "same_group",
    "is_contained",
    "order_modulo",
    "matrix_from_json",
    "matrix_to_json",
    "subgroup_from_json",
    "subgroup_to_json",
]


class DimensionMismatchError(ValueError):
    pass


class IncompatibleModuliError(ValueError):
    pass


class NotASubgroupError(ValueError):
    pass


Vector = tuple[Fraction, ...]


# -- integer matrices -----------------------------------------------------

@dataclass(frozen=True)
class IntegerMatrix:
    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError("negative dimension")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(f"expected {self.rows * self.cols} entries, got {len(self.entries)}")
        object.__setattr__(self, "entries", tuple(int(x) for x in self.entries))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> "IntegerMatrix":
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise ValueError("ragged matrix")
        return cls(len(rows), cols, tuple(x for r in rows for x in r))

    @classmethod
    def identity(cls, n: int) -> "IntegerMatrix":
        return cls.from_rows([[int(i == j) for j in range(n)] for i in range(n)], n)

    def tolist(self) -> list[list[int]]:
        c = self.cols
        return [list(self.entries[i * c:(i + 1) * c]) for i in range(self.rows)]

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i * self.cols + j]

    def __matmul__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if self.cols != other.rows:
            raise DimensionMismatchError(f"{self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        a, b = self.tolist(), other.tolist()
        out = [[sum(a[i][t] * b[t][j] for t in range(self.cols)) for j in range(other.cols)]
               for i in range(self.rows)]
        return IntegerMatrix.from_rows(out, other.cols)

    def transpose(self) -> "IntegerMatrix":
        a = self.tolist()
        return IntegerMatrix.from_rows([[a[i][j] for i in range(self.rows)] for j in range(self.cols)], self.rows)

    def det(self) -> int:
        """Bareiss fraction-free determinant."""
        if self.rows != self.cols:
            raise DimensionMismatchError("determinant of a non-square matrix")
        n = self.rows
        if n == 0:
            return 1
        a = self.tolist()
        sign, prev = 1, 1
        for k in range(n - 1):
            if a[k][k] == 0:
                for i in range(k + 1, n):
                    if a[i][k] != 0:
                        a[k], a[i] = a[i], a[k]
                        sign = -sign
                        break
                else:
                    return 0
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            prev = a[k][k]
        return sign * a[n - 1][n - 1]


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    # returns (g, x, y) with x*a + y*b = g >= 0
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def hermite_normal_form(A: IntegerMatrix) -> tuple[IntegerMatrix, IntegerMatrix]:
    """Row-style HNF: returns (H, U) with U unimodular and U @ A == H.

    Nonzero rows of H come first, pivots are positive and strictly move
    right, and entries above a pivot lie in [0, pivot).
    """
    m, n = A.rows, A.cols
    h = A.tolist()
    u = IntegerMatrix.identity(m).tolist()
    r = 0
    for c in range(n):
        if r == m:
            break
        for i in range(r + 1, m):
            if h[i][c] == 0:
                continue
            a, b = h[r][c], h[i][c]
            g, x, y = _xgcd(a, b)
            s, t = -b // g, a // g
            for mat in (h, u):
                ri, rr = mat[i], mat[r]
                mat[r] = [x * p + y * q for p, q in zip(rr, ri)]
                mat[i] = [s * p + t * q for p, q in zip(rr, ri)]
        if h[r][c] == 0:
            continue
        if h[r][c] < 0:
            h[r] = [-v for v in h[r]]
            u[r] = [-v for v in u[r]]
        piv = h[r][c]
        for i in range(r):
            q = h[i][c] // piv
            if q:
                h[i] = [p - q * w for p, w in zip(h[i], h[r])]
                u[i] = [p - q * w for p, w in zip(u[i], u[r])]
        r += 1
    return IntegerMatrix.from_rows(h, n), IntegerMatrix.from_rows(u, m)


def smith_normal_form(A: IntegerMatrix) -> tuple[IntegerMatrix, IntegerMatrix, IntegerMatrix]:
    """Return (U, S, V) with A == U @ S @ V, U and V unimodular.

    S is diagonal with nonnegative entries d1 | d2 | ...; zeros trail.
    Pivots are chosen by minimal absolute value.
    """
    m, n = A.rows, A.cols
    s = A.tolist()
    u = IntegerMatrix.identity(m).tolist()
    v = IntegerMatrix.identity(n).tolist()

    # every row op E on s is undone on the right of u, every column op F
    # on the left of v, so A == u s v holds throughout
    def row_swap(i, j):
        s[i], s[j] = s[j], s[i]
        for row in u:
            row[i], row[j] = row[j], row[i]

    def row_add(i, j, c):  # row i += c * row j
        s[i] = [a + c * b for a, b in zip(s[i], s[j])]
        for row in u:
            row[j] -= c * row[i]

    def row_neg(i):
        s[i] = [-a for a in s[i]]
        for row in u:
            row[i] = -row[i]

    def col_swap(i, j):
        for row in s:
            row[i], row[j] = row[j], row[i]
        v[i], v[j] = v[j], v[i]

    def col_add(i, j, c):  # col j += c * col i
        for row in s:
            row[j] += c * row[i]
        v[i] = [a - c * b for a, b in zip(v[i], v[j])]

    for t in range(min(m, n)):
        while True:
            best = None
            for i in range(t, m):
                for j in range(t, n):
                    if s[i][j] and (best is None or abs(s[i][j]) < abs(s[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                return (IntegerMatrix.from_rows(u, m), IntegerMatrix.from_rows(s, n),
                        IntegerMatrix.from_rows(v, n))
            if best[0] != t:
                row_swap(t, best[0])
            if best[1] != t:
                col_swap(t, best[1])
            p = s[t][t]
            for i in range(t + 1, m):
                if s[i][t]:
                    row_add(i, t, -(s[i][t] // p))
            for j in range(t + 1, n):
                if s[t][j]:
                    col_add(t, j, -(s[t][j] // p))
            if any(s[i][t] for i in range(t + 1, m)) or any(s[t][j] for j in range(t + 1, n)):
                continue
            bad = next((i for i in range(t + 1, m) for j in range(t + 1, n) if s[i][j] % p), None)
            if bad is None:
                break
            row_add(t, bad, 1)
        if s[t][t] < 0:
            row_neg(t)
    return IntegerMatrix.from_rows(u, m), IntegerMatrix.from_rows(s, n), IntegerMatrix.from_rows(v, n)


def snf_diagonal(A: IntegerMatrix) -> list[int]:
    _, s, _ = smith_normal_form(A)
    return [s[i, i] for i in range(min(s.rows, s.cols))]


def left_kernel(rows: Sequence[Sequence[int]], cols: int) -> list[list[int]]:
    """Z-basis of {y : y @ M == 0} for the integer matrix M given by rows."""
    if not rows:
        return []
    h, u = hermite_normal_form(IntegerMatrix.from_rows(rows, cols))
    hl, ul = h.tolist(), u.tolist()
    return [ul[i] for i in range(len(hl)) if not any(hl[i])]


def integer_solutions(rows: Sequence[Sequence[int]], cols: int,
                      targets: Sequence[Sequence[int]]) -> list[list[int] | None]:
    """For each target w, an integer c with c @ M == w, or None if none exists.

    M is given by rows.  One HNF serves every target.
    """
    if not rows:
        return [[] if not any(w) else None for w in targets]
    h, u = hermite_normal_form(IntegerMatrix.from_rows(rows, cols))
    hl, ul = h.tolist(), u.tolist()
    r = sum(1 for row in hl if any(row))
    out: list[list[int] | None] = []
    for w in targets:
        y = solve_echelon_int(hl[:r], w)
        if y is None:
            out.append(None)
            continue
        out.append([sum(y[i] * ul[i][j] for i in range(r) if y[i]) for j in range(len(rows))])
    return out


def solve_echelon_int(basis: Sequence[Sequence[int]], w: Sequence[int]) -> list[int] | None:
    """Integer y with y @ basis == w for an echelon basis, or None."""
    res = list(w)
    y = []
    for row in basis:
        c = next(j for j, x in enumerate(row) if x)
        q, rem = divmod(res[c], row[c])
        if rem:
            return None
        y.append(q)
        if q:
            res = [a - q * b for a, b in zip(res, row)]
    return y if not any(res) else None


def lattice_basis(rows: Sequence[Sequence[int]], cols: int) -> list[list[int]]:
    """Echelon Z-basis (HNF rows) of the row span of an integer matrix."""
    if not rows:
        return []
    h, _ = hermite_normal_form(IntegerMatrix.from_rows(rows, cols))
    return [r for r in h.tolist() if any(r)]


# -- subgroups of Q^k -----------------------------------------------------

def _vec(v: Iterable) -> Vector:
    return tuple(Fraction(x) for x in v)


@dataclass(frozen=True)
class SubgroupPresentation:
    """The D_modulus-span of finitely many generators in Q^rank."""

    rank: int
    generators: tuple[Vector, ...]
    modulus: SupernaturalNumber = field(default_factory=SupernaturalNumber.one)

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("ambient rank must be at least 1")
        gens = tuple(_vec(g) for g in self.generators)
        for g in gens:
            if len(g) != self.rank:
                raise DimensionMismatchError(f"generator {g} has length {len(g)}, expected {self.rank}")
        object.__setattr__(self, "generators", gens)

    @classmethod
    def z_span(cls, gens: Sequence[Sequence], rank: int | None = None) -> "SubgroupPresentation":
        gens = [list(g) for g in gens]
        if rank is None:
            rank = len(gens[0])
        return cls(rank, tuple(_vec(g) for g in gens))

    @classmethod
    def standard(cls, k: int, modulus: SupernaturalNumber | None = None) -> "SubgroupPresentation":
        gens = tuple(tuple(Fraction(int(i == j)) for j in range(k)) for i in range(k))
        return cls(k, gens, modulus or SupernaturalNumber.one())

    def with_modulus(self, modulus: SupernaturalNumber) -> "SubgroupPresentation":
        return SubgroupPresentation(self.rank, self.generators, modulus)

    def is_z_span(self) -> bool:
        return self.modulus.is_one()

    def denominator(self) -> int:
        return lcm_all(x.denominator for g in self.generators for x in g)

    def integer_basis(self) -> tuple[int, list[list[int]]]:
        """(D, B) with the Z-span of the generators equal to (1/D) * rowspan(B)."""
        d = self.denominator()
        rows = [[int(x * d) for x in g] for g in self.generators]
        return d, lattice_basis(rows, self.rank)

    def basis(self) -> list[Vector]:
        """A Z-basis of the Z-span of the generators."""
        d, b = self.integer_basis()
        return [tuple(Fraction(x, d) for x in row) for row in b]


def _solve_echelon(basis: list[list[int]], w: Sequence[Fraction]) -> list[Fraction] | None:
    """Rational y with y @ basis == w, for basis in row echelon form."""
    y: list[Fraction] = []
    for i, row in enumerate(basis):
        c = next(j for j, x in enumerate(row) if x)
        acc = Fraction(w[c]) - sum((y[l] * basis[l][c] for l in range(i)), Fraction(0))
        y.append(acc / row[c])
    k = len(w)
    for j in range(k):
        if sum((y[i] * basis[i][j] for i in range(len(basis))), Fraction(0)) != w[j]:
            return None
    return y


def order_modulo(v: Sequence, H: SubgroupPresentation) -> int | None:
    """Least d >= 1 with d*v in the Z-span of H's generators, None if v is outside the Q-span."""
    if len(v) != H.rank:
        raise DimensionMismatchError(f"vector of length {len(v)} in rank {H.rank}")
    v = _vec(v)
    if not H.generators:
        return 1 if not any(v) else None
    d, b = H.integer_basis()
    if not b:
        return 1 if not any(v) else None
    y = _solve_echelon(b, [x * d for x in v])
    if y is None:
        return None
    return lcm_all(c.denominator for c in y)


def subgroup_membership(v: Sequence, H: SubgroupPresentation) -> bool:
    """Decide v in D_n-span of H's generators.

    d*v lies in the Z-span for exactly the multiples d of the order of v
    modulo that span, so membership holds iff this order divides n.
    """
    o = order_modulo(v, H)
    if o is None:
        return False
    return divides(o, H.modulus)


def _z_intersection(a_rows: list[list[Fraction]], b_rows: list[list[Fraction]], k: int) -> list[Vector]:
    """Z-basis of span_Z(a_rows) cap span_Z(b_rows) via the kernel of [A | -B]."""
    if not a_rows or not b_rows:
        return []
    d = lcm_all(x.denominator for r in a_rows + b_rows for x in r)
    A = [[int(x * d) for x in r] for r in a_rows]
    B = [[int(x * d) for x in r] for r in b_rows]
    stacked = A + [[-x for x in r] for r in B]
    ker = left_kernel(stacked, k)
    m = len(A)
    pts = [[sum(y[i] * A[i][j] for i in range(m)) for j in range(k)] for y in ker]
    basis = lattice_basis(pts, k) if pts else []
    return [tuple(Fraction(x, d) for x in r) for r in basis]


def _in_q_span(b_rows: list[Vector], a_rows: list[Vector], k: int) -> list[Vector]:
    """Z-basis of span_Z(b_rows) cap span_Q(a_rows)."""
    if not b_rows:
        return []
    if not a_rows:
        return []
    da = lcm_all(x.denominator for r in a_rows for x in r)
    A = [[int(x * da) for x in r] for r in a_rows]
    # annihilator of span(A): integer vectors c with A c = 0
    ann = left_kernel([[A[i][j] for i in range(len(A))] for j in range(k)], len(A))
    db = lcm_all(x.denominator for r in b_rows for x in r)
    B = [[int(x * db) for x in r] for r in b_rows]
    if not ann:
        pts = B
    else:
        BC = [[sum(row[j] * c[j] for j in range(k)) for c in ann] for row in B]
        z = left_kernel(BC, len(ann))
        pts = [[sum(zz[i] * B[i][j] for i in range(len(B))) for j in range(k)] for zz in z]
    basis = lattice_basis(pts, k) if pts else []
    return [tuple(Fraction(x, db) for x in r) for r in basis]


def _exponent_over(t_rows: list[Vector], H: SubgroupPresentation) -> int:
    return lcm_all(order_modulo(t, H) or 1 for t in t_rows)


def subgroup_intersection(H1: SubgroupPresentation, H2: SubgroupPresentation) -> SubgroupPresentation:
    """Presentation of H1 cap H2.

    Equal moduli: localization commutes with intersection, so intersect the
    Z-spans and keep the modulus.  Coprime moduli p, q: x lies in both iff
    K x in M1 and L x in M2 with K | p, L | q, which forces the result into a
    Z-span; K and L need only cover the torsion orders of M2 over M1 and of
    M1 over M2.  When M1 == M2 this is the familiar 1 = a k + b l argument:
    K and L are then 1 and the result is M1 itself.
    """
    if H1.rank != H2.rank:
        raise DimensionMismatchError(f"ranks {H1.rank} and {H2.rank}")
    k = H1.rank
    m1, m2 = H1.basis(), H2.basis()
    if H1.modulus == H2.modulus:
        gens = _z_intersection([list(r) for r in m1], [list(r) for r in m2], k)
        return SubgroupPresentation(k, tuple(gens), H1.modulus)
    if not relatively_prime(H1.modulus, H2.modulus):
        raise IncompatibleModuliError(f"moduli {H1.modulus} and {H2.modulus} are neither equal nor coprime")
    z1 = SubgroupPresentation(k, tuple(m1))
    z2 = SubgroupPresentation(k, tuple(m2))
    e1 = _exponent_over(_in_q_span(m2, m1, k), z1)
    e2 = _exponent_over(_in_q_span(m1, m2, k), z2)
    big_k = H1.modulus.part_of(e1)
    big_l = H2.modulus.part_of(e2)
    a = [[x / big_k for x in r] for r in m1]
    b = [[x / big_l for x in r] for r in m2]
    gens = _z_intersection(a, b, k)
    return SubgroupPresentation(k, tuple(gens))


def same_group(H1: SubgroupPresentation, H2: SubgroupPresentation) -> bool:
    """Mutual containment of the represented groups."""
    return H1.rank == H2.rank and is_contained(H1, H2) and is_contained(H2, H1)


def is_contained(H1: SubgroupPresentation, H2: SubgroupPresentation) -> bool:
    """H1 subset H2.  D_n is generated by the 1/p^e, one prime at a time."""
    if not all(subgroup_membership(g, H2) for g in H1.generators):
        return False
    gens = [g for g in H1.generators if any(g)]
    n = H1.modulus
    if not gens or n.is_one():
        return True
    if n.universal:
        return H2.modulus.universal
    for p, e in n.factors:
        if e is INF:
            # every g / p^k must fit, which needs p^inf in the target modulus
            if H2.modulus.exponent(p) is not INF:
                return False
        elif not all(subgroup_membership(tuple(x / p**e for x in g), H2) for g in gens):
            return False
    return True


def quotient_invariants(H: SubgroupPresentation, G: SubgroupPresentation) -> tuple[int, list[int]]:
    """Isomorphism type of G/H as (free rank, invariant factors > 1)."""
    if not (H.is_z_span() and G.is_z_span()):
        raise ValueError("quotient_invariants works with Z-spans")
    if H.rank != G.rank:
        raise DimensionMismatchError(f"ranks {H.rank} and {G.rank}")
    basis = G.basis()
    r = len(basis)
    d = lcm_all([x.denominator for b in basis for x in b] + [x.denominator for h in H.generators for x in h])
    ib = lattice_basis([[int(x * d) for x in b] for b in basis], G.rank) if basis else []
    coords = []
    for h in H.generators:
        y = _solve_echelon(ib, [x * d for x in h]) if ib else ([] if not any(h) else None)
        if y is None or any(c.denominator != 1 for c in y):
            raise NotASubgroupError(f"generator {tuple(map(format_rational, h))} is not in G")
        coords.append([int(c) for c in y])
    coords = [c for c in coords if any(c)]
    if not coords or r == 0:
        return r, []
    diag = snf_diagonal(IntegerMatrix.from_rows(coords, r))
    nonzero = [x for x in diag if x]
    return r - len(nonzero), [x for x in nonzero if x > 1]


# -- JSON ------------------------------------------------------------------

def matrix_to_json(A: IntegerMatrix) -> list[list[str]]:
    return [[str(x) for x in row] for row in A.tolist()]


def matrix_from_json(obj) -> IntegerMatrix:
    if not isinstance(obj, list) or not all(isinstance(r, list) for r in obj):
        raise ValueError("matrix must be a list of rows")
    rows = []
    for r in obj:
        row = []
        for x in r:
            if isinstance(x, bool) or not isinstance(x, (str, int)):
                raise ValueError(f"bad matrix entry {x!r}")
            row.append(int(x))
        rows.append(row)
    return IntegerMatrix.from_rows(rows)


def subgroup_to_json(H: SubgroupPresentation) -> dict:
    return {
        "rank": H.rank,
        "generators": [[format_rational(x) for x in g] for g in H.generators],
        "modulus": supernatural_to_json(H.modulus),
    }


def subgroup_from_json(obj) -> SubgroupPresentation:
    if not isinstance(obj, dict) or "rank" not in obj or "generators" not in obj:
        raise ValueError("subgroup needs 'rank' and 'generators'")
    modulus = supernatural_from_json(obj["modulus"]) if "modulus" in obj else SupernaturalNumber.one()
    gens = tuple(tuple(parse_rational(x) for x in g) for g in obj["generators"])
    return SubgroupPresentation(int(obj["rank"]), gens, modulus)

