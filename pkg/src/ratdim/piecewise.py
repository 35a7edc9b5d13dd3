"""Continuous piecewise-linear functions with rational nodes.

A function is stored by its values at finitely many nodes; between nodes it
is linear and beyond the outer nodes it is constant.  Arithmetic is exact and
results are kept free of redundant (collinear) nodes, so two equal functions
have equal node lists.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional

__all__ = ["PiecewiseLinear"]


def _simplify(pts: list[tuple[Fraction, Fraction]]) -> tuple[tuple[Fraction, Fraction], ...]:
    if len(pts) == 1:
        return ((Fraction(0), pts[0][1]),)
    out = [pts[0]]
    for i in range(1, len(pts)):
        x, y = pts[i]
        if i == len(pts) - 1:
            out.append((x, y))
            break
        (x0, y0), (x1, y1) = out[-1], pts[i + 1]
        # drop nodes lying on the segment between neighbours
        if (y - y0) * (x1 - x0) != (y1 - y0) * (x - x0):
            out.append((x, y))
    # constant ends need no outer node
    while len(out) > 1 and out[0][1] == out[1][1]:
        out.pop(0)
    while len(out) > 1 and out[-1][1] == out[-2][1]:
        out.pop()
    if len(out) == 1:
        return ((Fraction(0), out[0][1]),)
    return tuple(out)


@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous piecewise-linear function of x through the given nodes.

    Constant beyond the first and last node.
    """

    nodes: tuple[tuple[Fraction, Fraction], ...]
    _xs: tuple[Fraction, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = sorted((Fraction(x), Fraction(y)) for x, y in self.nodes)
        if not pts:
            raise ValueError("a piecewise-linear function needs a node")
        if any(pts[i][0] == pts[i + 1][0] for i in range(len(pts) - 1)):
            raise ValueError("repeated node")
        object.__setattr__(self, "nodes", _simplify(pts))
        object.__setattr__(self, "_xs", tuple(x for x, _ in self.nodes))

    @classmethod
    def constant(cls, c) -> "PiecewiseLinear":
        return cls(((Fraction(0), Fraction(c)),))

    @classmethod
    def hat(cls, lo, hi, height=1) -> "PiecewiseLinear":
        lo, hi = Fraction(lo), Fraction(hi)
        return cls(((lo, Fraction(0)), ((lo + hi) / 2, Fraction(height)), (hi, Fraction(0))))

    @property
    def xs(self) -> tuple[Fraction, ...]:
        return self._xs

    def __call__(self, x) -> Fraction:
        if not isinstance(x, Fraction):
            x = Fraction(x)
        xs = self._xs
        i = bisect.bisect_right(xs, x)
        if i == 0:
            return self.nodes[0][1]
        if i == len(xs):
            return self.nodes[-1][1]
        (x0, y0), (x1, y1) = self.nodes[i - 1], self.nodes[i]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def _combine(self, other: "PiecewiseLinear", op: Callable[[Fraction, Fraction], Fraction]) -> "PiecewiseLinear":
        xs = sorted(set(self.xs) | set(other.xs))
        return PiecewiseLinear(tuple((x, op(self(x), other(x))) for x in xs))

    def __add__(self, other: "PiecewiseLinear") -> "PiecewiseLinear":
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other: "PiecewiseLinear") -> "PiecewiseLinear":
        return self._combine(other, lambda a, b: a - b)

    def __neg__(self) -> "PiecewiseLinear":
        return PiecewiseLinear(tuple((x, -y) for x, y in self.nodes))

    def scale(self, c) -> "PiecewiseLinear":
        c = Fraction(c)
        return PiecewiseLinear(tuple((x, c * y) for x, y in self.nodes))

    def is_zero(self) -> bool:
        return len(self.nodes) == 1 and self.nodes[0][1] == 0

    def zero_on(self, lo: Optional[Fraction], hi: Optional[Fraction]) -> bool:
        """True when the function vanishes on [lo, hi] (None for an infinite end)."""
        pts = [x for x in self.xs if (lo is None or x >= lo) and (hi is None or x <= hi)]
        if lo is not None:
            pts.append(Fraction(lo))
        if hi is not None:
            pts.append(Fraction(hi))
        if lo is None:
            pts.append(self.xs[0] - 1)
        if hi is None:
            pts.append(self.xs[-1] + 1)
        return all(self(x) == 0 for x in pts)

    def vanishes_near(self, x0) -> bool:
        """True when the function is zero on a neighbourhood of x0."""
        x0 = Fraction(x0)
        if self(x0) != 0:
            return False
        xs = self.xs
        left = [x for x in xs if x < x0]
        right = [x for x in xs if x > x0]
        return (not left or self(left[-1]) == 0) and (not right or self(right[0]) == 0)

    def affine_on(self, lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
        """(a, b) with f(x) = a + b x on [lo, hi]; the cell must avoid interior nodes."""
        if lo == hi:
            return self(lo), Fraction(0)
        ylo, yhi = self(lo), self(hi)
        b = (yhi - ylo) / (hi - lo)
        return ylo - b * lo, b

    def range_on(self, lo, hi) -> tuple[Fraction, Fraction]:
        lo, hi = Fraction(lo), Fraction(hi)
        vals = [self(lo), self(hi)] + [y for x, y in self.nodes if lo < x < hi]
        return min(vals), max(vals)

    def float_eval(self) -> Callable[[float], float]:
        xs = [float(x) for x, _ in self.nodes]
        ys = [float(y) for _, y in self.nodes]

        def f(x: float) -> float:
            i = bisect.bisect_right(xs, x)
            if i == 0:
                return ys[0]
            if i == len(xs):
                return ys[-1]
            return ys[i - 1] + (ys[i] - ys[i - 1]) * (x - xs[i - 1]) / (xs[i] - xs[i - 1])
        return f

    def to_json(self) -> list[list[str]]:
        from .supernatural import format_rational
        return [[format_rational(x), format_rational(y)] for x, y in self.nodes]

    @classmethod
    def from_json(cls, obj: Iterable) -> "PiecewiseLinear":
        from .supernatural import parse_rational
        return cls(tuple((parse_rational(x), parse_rational(y)) for x, y in obj))
