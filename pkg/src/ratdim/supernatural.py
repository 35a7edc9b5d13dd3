"""Supernatural numbers and the localized rationals D_n.

A supernatural number is stored as a finite map prime -> exponent, where the
exponent is a positive int or ``INF``.  The universal number (D_u = Q) is a
separate flag.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping, Union

__all__ = [
    "INF",
    "SupernaturalNumber",
    "LocalizedRational",
    "FactorizationError",
    "factorize",
    "is_prime",
    "divides",
    "relatively_prime",
    "dn_contains",
    "parse_rational",
    "format_rational",
    "supernatural_from_json",
    "supernatural_to_json",
]

TRIAL_DIVISION_LIMIT = 10**6


class _Infinity:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()
Exponent = Union[int, _Infinity]


class FactorizationError(ValueError):
    """Raised when trial division cannot finish below the bound."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def factorize(n: int) -> dict[int, int]:
    """Factor n >= 1 by trial division with divisors below 10**6."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    out: dict[int, int] = {}
    f = 2
    while f * f <= n:
        if f > TRIAL_DIVISION_LIMIT:
            raise FactorizationError(f"{n} has no factor below {TRIAL_DIVISION_LIMIT}; supply it pre-factored")
        while n % f == 0:
            out[f] = out.get(f, 0) + 1
            n //= f
        f += 1 if f == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


@dataclass(frozen=True)
class SupernaturalNumber:
    """Formal product of prime powers, exponents in N u {INF}."""

    factors: tuple[tuple[int, Exponent], ...] = ()
    universal: bool = False

    def __post_init__(self):
        items = dict(self.factors)
        if len(items) != len(self.factors):
            raise ValueError("repeated prime in supernatural number")
        for p, e in items.items():
            if not isinstance(p, int) or not is_prime(p):
                raise ValueError(f"{p!r} is not prime")
            if e is not INF and (not isinstance(e, int) or e < 1):
                raise ValueError(f"bad exponent {e!r} for prime {p}")
        if self.universal and items:
            raise ValueError("the universal number carries no factor list")
        object.__setattr__(self, "factors", tuple(sorted(items.items())))

    @classmethod
    def of(cls, mapping: Mapping[int, Exponent] | None = None) -> "SupernaturalNumber":
        mapping = mapping or {}
        return cls(tuple((p, e) for p, e in mapping.items() if e != 0))

    @classmethod
    def one(cls) -> "SupernaturalNumber":
        return cls()

    @classmethod
    def universal_number(cls) -> "SupernaturalNumber":
        return cls(universal=True)

    @classmethod
    def from_int(cls, n: int) -> "SupernaturalNumber":
        return cls.of(factorize(n))

    @classmethod
    def infinite_power(cls, *primes: int) -> "SupernaturalNumber":
        return cls.of({p: INF for p in primes})

    def exponent(self, p: int) -> Exponent:
        if self.universal:
            return INF
        return dict(self.factors).get(p, 0)

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def is_one(self) -> bool:
        return not self.universal and not self.factors

    def is_infinite(self) -> bool:
        """True when D_n is dense in R, i.e. some exponent is INF."""
        return self.universal or any(e is INF for _, e in self.factors)

    def finite_value(self) -> int | None:
        """The integer value when every exponent is finite, else None."""
        if self.is_infinite():
            return None
        v = 1
        for p, e in self.factors:
            v *= p**e
        return v

    def part_of(self, n: int) -> int:
        """Largest divisor of n that divides self."""
        if self.universal:
            return n
        out = 1
        for p, e in self.factors:
            k = 0
            while n % p == 0 and (e is INF or k < e):
                n //= p
                out *= p
                k += 1
        return out

    def __mul__(self, other: "SupernaturalNumber") -> "SupernaturalNumber":
        if self.universal or other.universal:
            return SupernaturalNumber.universal_number()
        merged: dict[int, Exponent] = dict(self.factors)
        for p, e in other.factors:
            if p in merged:
                a = merged[p]
                merged[p] = INF if (a is INF or e is INF) else a + e
            else:
                merged[p] = e
        return SupernaturalNumber.of(merged)

    def lcm(self, other: "SupernaturalNumber") -> "SupernaturalNumber":
        """Exponent-wise maximum; D_lcm is the group generated by D_self and D_other."""
        if self.universal or other.universal:
            return SupernaturalNumber.universal_number()
        merged: dict[int, Exponent] = dict(self.factors)
        for p, e in other.factors:
            a = merged.get(p, 0)
            merged[p] = INF if (a is INF or e is INF) else max(a, e)
        return SupernaturalNumber.of(merged)

    def __str__(self) -> str:
        if self.universal:
            return "u"
        if not self.factors:
            return "1"
        return "*".join(f"{p}^inf" if e is INF else (f"{p}" if e == 1 else f"{p}^{e}") for p, e in self.factors)


def divides(q: int, n: SupernaturalNumber) -> bool:
    if q < 1:
        raise ValueError("q must be a positive integer")
    if n.universal:
        return True
    # strip the allowed prime powers; no factoring of q is needed
    for p, e in n.factors:
        k = 0
        while q % p == 0 and (e is INF or k < e):
            q //= p
            k += 1
    return q == 1


def relatively_prime(p: SupernaturalNumber, q: SupernaturalNumber) -> bool:
    if p.is_one() or q.is_one():
        return True
    if p.universal or q.universal:
        return False
    return not set(p.primes) & set(q.primes)


def dn_contains(r: Fraction | int, n: SupernaturalNumber) -> bool:
    return divides(Fraction(r).denominator, n)


@dataclass(frozen=True)
class LocalizedRational:
    value: Fraction
    modulus: SupernaturalNumber

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))
        if not dn_contains(self.value, self.modulus):
            raise ValueError(f"{self.value} is not in D_{self.modulus}")

    def _check(self, other: "LocalizedRational") -> None:
        if other.modulus != self.modulus:
            raise ValueError("moduli differ")

    def __add__(self, other: "LocalizedRational") -> "LocalizedRational":
        self._check(other)
        return LocalizedRational(self.value + other.value, self.modulus)

    def __sub__(self, other: "LocalizedRational") -> "LocalizedRational":
        self._check(other)
        return LocalizedRational(self.value - other.value, self.modulus)

    def __mul__(self, other: "LocalizedRational") -> "LocalizedRational":
        self._check(other)
        return LocalizedRational(self.value * other.value, self.modulus)

    def __neg__(self) -> "LocalizedRational":
        return LocalizedRational(-self.value, self.modulus)


# -- JSON ------------------------------------------------------------------

def parse_rational(s: Union[str, int]) -> Fraction:
    if isinstance(s, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(s, int):
        return Fraction(s)
    if not isinstance(s, str):
        raise ValueError(f"rationals are encoded as strings, got {s!r}")
    return Fraction(s.strip())


def format_rational(r: Fraction | int) -> str:
    r = Fraction(r)
    return str(r.numerator) if r.denominator == 1 else f"{r.numerator}/{r.denominator}"


def supernatural_from_json(obj) -> SupernaturalNumber:
    if obj == "universal":
        return SupernaturalNumber.universal_number()
    if isinstance(obj, dict) and set(obj) == {"factors"}:
        out: dict[int, Exponent] = {}
        for pair in obj["factors"]:
            p, e = pair
            if not isinstance(p, int) or isinstance(p, bool):
                raise ValueError(f"bad prime {p!r}")
            if e == "inf":
                out[p] = INF
            elif isinstance(e, int) and not isinstance(e, bool):
                out[p] = e
            else:
                raise ValueError(f"bad exponent {e!r}")
        if len(out) != len(obj["factors"]):
            raise ValueError("repeated prime")
        return SupernaturalNumber.of(out)
    raise ValueError(f"not a supernatural number: {obj!r}")


def supernatural_to_json(n: SupernaturalNumber):
    if n.universal:
        return "universal"
    return {"factors": [[p, "inf" if e is INF else e] for p, e in n.factors]}


def lcm_all(values: Iterable[int]) -> int:
    out = 1
    for v in values:
        out = out * v // gcd(out, v)
    return out
