"""Independent reference computations used by the tests.

Nothing here imports the package's lattice or positivity code.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from math import gcd

import numpy as np


def det(rows) -> Fraction:
    a = [[Fraction(x) for x in r] for r in rows]
    n = len(a)
    out = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            out = -out
        out *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            for j in range(c, n):
                a[r][j] -= f * a[c][j]
    return out


def rank(rows) -> int:
    rows = [list(r) for r in rows]
    if not rows:
        return 0
    k = len(rows[0])
    best = 0
    for size in range(1, min(len(rows), k) + 1):
        if any(det([[rows[i][j] for j in cs] for i in rs]) != 0
               for rs in itertools.combinations(range(len(rows)), size)
               for cs in itertools.combinations(range(k), size)):
            best = size
    return best


def determinantal_invariants(rows, k):
    """(free rank of Z^k / span(rows), invariant factors > 1) via gcds of minors."""
    r = rank(rows)
    divisors = [1]
    for size in range(1, r + 1):
        g = 0
        for rs in itertools.combinations(range(len(rows)), size):
            for cs in itertools.combinations(range(k), size):
                g = gcd(g, int(det([[rows[i][j] for j in cs] for i in rs])))
        divisors.append(g)
    factors = [divisors[i] // divisors[i - 1] for i in range(1, r + 1)]
    return k - r, [d for d in factors if d > 1]


def cramer_bound(gens, radius) -> int | None:
    """Bound on |coefficients| of any point with sup-norm <= radius, for independent
    generators spanning a full-rank lattice in their rational span; None if dependent."""
    g = len(gens)
    if g == 0:
        return 0
    k = len(gens[0])
    # pick g independent coordinates
    for cs in itertools.combinations(range(k), g):
        sub = [[gens[i][j] for j in cs] for i in range(g)]
        d = det(sub)
        if d != 0:
            break
    else:
        return None
    # |c_i| <= sum_j |adj_ij| * radius / |d|, with |adj_ij| <= product of row norms (Hadamard)
    norms = [sum(abs(x) for x in row) for row in sub]
    worst = max(int(np.prod([n for t, n in enumerate(norms) if t != i])) if g > 1 else 1 for i in range(g))
    return int(g * worst * radius / abs(d)) + 1


def lattice_points(gens, coeff_bound, radius):
    """All integer combinations with |coeff| <= coeff_bound landing in the sup-norm ball."""
    if not gens:
        return {tuple([0] * 0)}
    g = np.array(gens, dtype=np.int64)
    rng = np.arange(-coeff_bound, coeff_bound + 1)
    grids = np.stack(np.meshgrid(*([rng] * len(gens)), indexing="ij"), -1).reshape(-1, len(gens))
    pts = grids @ g
    keep = np.all(np.abs(pts) <= radius, axis=1)
    return {tuple(int(x) for x in p) for p in pts[keep]}


def sample_sign_interval(coeffs: dict[int, Fraction], x_lo: Fraction, x_hi: Fraction):
    """Certified enclosure of sum c_n e^{n x} on [x_lo, x_hi] using mpmath interval arithmetic."""
    import mpmath
    iv = mpmath.iv
    iv.prec = 80
    lo = iv.mpf(x_lo.numerator) / x_lo.denominator
    hi = iv.mpf(x_hi.numerator) / x_hi.denominator
    x = iv.mpf([lo.a, hi.b])
    total = iv.mpf(0)
    for n, c in coeffs.items():
        total += iv.mpf(c.numerator) / c.denominator * iv.exp(n * x)
    return total


# -- positivity sampling ------------------------------------------------------------------

_REL = 2.0 ** -40  # outward widening, far above libm's error for exp


def float_enclosures(coeffs: dict[int, Fraction], cells: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lower and upper bounds of sum c_n e^{n x} on each cell [lo, hi] (rows of `cells`).

    Each term is monotone in x, so its range on a cell is spanned by the endpoint
    values; float rounding is absorbed by a relative widening per term.
    """
    lo_x, hi_x = cells[:, 0], cells[:, 1]
    lo = np.zeros(len(cells))
    hi = np.zeros(len(cells))
    for n, c in coeffs.items():
        a = float(c) * np.exp(n * lo_x)
        b = float(c) * np.exp(n * hi_x)
        t_lo, t_hi = np.minimum(a, b), np.maximum(a, b)
        lo += t_lo - np.abs(t_lo) * _REL - 1e-300
        hi += t_hi + np.abs(t_hi) * _REL + 1e-300
    slack = (np.abs(lo) + np.abs(hi)) * _REL * (len(coeffs) + 1)
    return lo - slack, hi + slack


def sampling_cells(components, points: int, span: float = 6.0) -> np.ndarray:
    """About `points` cells covering the closed set, rays cut at distance `span`."""
    pieces = []
    for lo, hi in components:
        point = lo is not None and lo == hi
        lo = -span if lo is None else float(lo)
        hi = span if hi is None else float(hi)
        if lo > hi:
            continue
        if not point:
            # stay inside F despite rounding of the rational endpoints
            lo, hi = lo + 1e-12 * max(1.0, abs(lo)), hi - 1e-12 * max(1.0, abs(hi))
        pieces.append((lo, hi))
    total = sum(hi - lo for lo, hi in pieces) or 1.0
    cells = []
    for lo, hi in pieces:
        if hi == lo:
            eps = 1e-15 * max(1.0, abs(lo))  # covers the rounding of a rational point
            cells.append(np.array([[lo - eps, hi + eps]]))
            continue
        m = max(2, int(points * (hi - lo) / total))
        edges = np.linspace(lo, hi, m + 1)
        cells.append(np.stack([edges[:-1], edges[1:]], 1))
    return np.concatenate(cells) if cells else np.zeros((0, 2))


def random_laurent_coeffs(rng) -> dict[int, Fraction]:
    """Random exponents in [-3, 3]; a third of the time a shifted square plus a small
    constant, which is positive everywhere but can come very close to zero."""
    kind = rng.random()
    if kind < 0.35:
        r = Fraction(rng.randint(1, 40), 8)
        eps = Fraction(rng.choice([-1, 1]), rng.choice([16, 256, 4096]))
        k = rng.randint(-1, 1)
        # (e^x - r)^2 + eps, times e^{kx}
        return {k + 2: Fraction(1), k + 1: -2 * r, k: r * r + eps}
    out: dict[int, Fraction] = {}
    for _ in range(rng.randint(1, 4)):
        out[rng.randint(-3, 3)] = Fraction(rng.randint(-9, 9), rng.choice([1, 2, 3, 4]))
    out = {n: c for n, c in out.items() if c}
    return out or {0: Fraction(1)}


def random_closed_set(rng) -> list[tuple[Fraction | None, Fraction | None]]:
    """Up to three disjoint components with endpoints in [-3, 3]."""
    cuts = sorted({Fraction(rng.randint(-12, 12), 4) for _ in range(rng.randint(2, 6))})
    comps: list[tuple] = []
    i = 0
    while i < len(cuts) and len(comps) < 3:
        if rng.random() < 0.25:
            comps.append((cuts[i], cuts[i]))
            i += 2
        elif i + 1 < len(cuts):
            comps.append((cuts[i], cuts[i + 1]))
            i += 3
        else:
            break
    if not comps:
        comps = [(cuts[0], cuts[0])]
    if rng.random() < 0.3:
        lo = comps[0][0]
        comps[0] = (None, comps[0][1]) if lo is not None else comps[0]
    elif rng.random() < 0.3:
        comps[-1] = (comps[-1][0], None)
    return comps


def witness_is_genuine(coeffs: dict[int, Fraction], comps, w) -> bool:
    """Independent check of a NotPositive witness using sympy and mpmath."""
    import mpmath
    import sympy

    def in_F(x):
        return any((lo is None or lo <= x) and (hi is None or x <= hi) for lo, hi in comps)

    mpmath.mp.prec = 200
    if w.kind == "point":
        x = w.x_lo
        if not in_F(x):
            return False
        if x == 0:
            return sum(coeffs.values()) <= 0
        val = mpmath.fsum(mpmath.mpf(c.numerator) / c.denominator
                          * mpmath.exp(n * mpmath.mpf(x.numerator) / x.denominator) for n, c in coeffs.items())
        return val < 0
    # a root of the t-polynomial inside e^{[x_lo, x_hi]} with [x_lo, x_hi] inside F
    if not (in_F(w.x_lo) and in_F(w.x_hi)) or not any(
            (lo is None or lo <= w.x_lo) and (hi is None or w.x_hi <= hi) for lo, hi in comps):
        return False
    t = sympy.symbols("t")
    m = min(coeffs)
    q = sympy.Poly(sum(sympy.Rational(c.numerator, c.denominator) * t ** (n - m) for n, c in coeffs.items()), t)
    sq = q.sqf_part()
    a, b = sympy.Rational(w.t_lo.numerator, w.t_lo.denominator), sympy.Rational(w.t_hi.numerator, w.t_hi.denominator)
    va, vb = sq.eval(a), sq.eval(b)
    if not (va == 0 or vb == 0 or (va > 0) != (vb > 0)):
        return False
    lo_e = mpmath.exp(mpmath.mpf(w.x_lo.numerator) / w.x_lo.denominator)
    hi_e = mpmath.exp(mpmath.mpf(w.x_hi.numerator) / w.x_hi.denominator)
    return lo_e <= mpmath.mpf(a.p) / a.q and mpmath.mpf(b.p) / b.q <= hi_e


def gz_value_mp(e, x: Fraction):
    """f(x) for a G_Z element, summed term by term in mpmath from the stored terms."""
    import mpmath
    mpmath.mp.prec = 200
    xm = mpmath.mpf(x.numerator) / x.denominator
    total = mpmath.mpf(0)
    for (j, m), r in e.f.terms:
        c = r(x)
        if c == 0:
            continue
        if m and x == 0:
            raise ValueError("terms with a pole at 0 vanish near 0")
        total += mpmath.mpf(c.numerator) / c.denominator * mpmath.exp(j * xm) / (1 - mpmath.exp(-xm)) ** m
    return total


def random_truncated_element(rng, gens, terms: int = 4):
    """A random integer combination of a few truncation generators."""
    from ratdim.kms import combination
    picks = rng.sample(range(len(gens)), min(terms, len(gens)))
    coeffs = [rng.choice([-3, -2, -1, 1, 2, 3]) for _ in picks]
    return combination(coeffs, [gens[i][1] for i in picks])


def random_beta_in(rng, comps) -> Fraction:
    lo, hi = rng.choice(comps)
    if lo is None and hi is None:
        lo, hi = Fraction(-3), Fraction(3)
    elif lo is None:
        lo = hi - 4
    elif hi is None:
        hi = lo + 4
    return lo + (hi - lo) * Fraction(rng.randint(0, 48), 48)
