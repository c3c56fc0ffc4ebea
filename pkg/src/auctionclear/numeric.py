"""Arithmetic kernel shared by every solver in the package.

Two modes are supported.  In ``rational`` mode every scalar is a
:class:`fractions.Fraction` and all comparisons are exact; in ``float`` mode
scalars are binary64 floats compared with the tolerances of a
:class:`TolerancePolicy`.  The mode is chosen once, when an instance is
loaded, and carried around in an :class:`Arithmetic` object.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Sequence, Union

Scalar = Union[Fraction, float]

RATIONAL = "rational"
FLOAT = "float"
MODES = (RATIONAL, FLOAT)


class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def compare(a: Scalar, b: Scalar, eps: Scalar = 0) -> Ordering:
    """Three-way comparison; ``a`` and ``b`` are equal iff ``|a - b| <= eps``."""
    d = a - b
    if abs(d) <= eps:
        return Ordering.EQUAL
    return Ordering.GREATER if d > 0 else Ordering.LESS


@dataclass(frozen=True)
class TolerancePolicy:
    feasibility_eps: Scalar = 1e-9
    integrality_eps: Scalar = 1e-6
    complementarity_eps: Scalar = 1e-8

    def __post_init__(self):
        for name in ("feasibility_eps", "integrality_eps", "complementarity_eps"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @classmethod
    def exact(cls) -> "TolerancePolicy":
        z = Fraction(0)
        return cls(z, z, z)


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite scalar {x!r}")
        # decimal reading, so 0.1 means 1/10
        return Fraction(Decimal(repr(x)))
    if isinstance(x, Decimal):
        if not x.is_finite():
            raise ValueError(f"non-finite scalar {x!r}")
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    num = getattr(x, "numerator", None)
    den = getattr(x, "denominator", None)
    if num is not None and den is not None:
        return Fraction(int(num), int(den))
    raise TypeError(f"cannot convert {type(x).__name__} to a scalar")


def _to_float(x) -> float:
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, str):
        s = x.strip()
        v = float(Fraction(s)) if "/" in s else float(s)
    else:
        v = float(x)
    if not math.isfinite(v):
        raise ValueError(f"non-finite scalar {x!r}")
    return v


@dataclass(frozen=True)
class Arithmetic:
    """Engine-wide number mode plus the tolerances that go with it.

    Rational mode forces every tolerance to exact zero.
    """

    mode: str = RATIONAL
    tol: TolerancePolicy = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown arithmetic mode {self.mode!r}")
        if self.mode == RATIONAL:
            object.__setattr__(self, "tol", TolerancePolicy.exact())
        elif self.tol is None:
            object.__setattr__(self, "tol", TolerancePolicy())
        else:
            t = self.tol
            object.__setattr__(self, "tol", TolerancePolicy(
                float(t.feasibility_eps), float(t.integrality_eps),
                float(t.complementarity_eps)))

    @property
    def exact(self) -> bool:
        return self.mode == RATIONAL

    @property
    def zero(self) -> Scalar:
        return Fraction(0) if self.exact else 0.0

    @property
    def one(self) -> Scalar:
        return Fraction(1) if self.exact else 1.0

    @property
    def pivot_eps(self) -> Scalar:
        """Smallest magnitude accepted as a simplex pivot element."""
        return self.zero if self.exact else 1e-11

    def scalar(self, x) -> Scalar:
        return _to_fraction(x) if self.exact else _to_float(x)

    def vector(self, xs: Iterable) -> tuple:
        return tuple(self.scalar(x) for x in xs)

    def matrix(self, rows: Iterable[Iterable]) -> tuple:
        return tuple(self.vector(r) for r in rows)

    def cmp(self, a: Scalar, b: Scalar, eps: Scalar | None = None) -> Ordering:
        return compare(a, b, self.tol.feasibility_eps if eps is None else eps)

    def is_zero(self, a: Scalar, eps: Scalar | None = None) -> bool:
        return abs(a) <= (self.tol.feasibility_eps if eps is None else eps)

    def leq(self, a: Scalar, b: Scalar, eps: Scalar | None = None) -> bool:
        return a - b <= (self.tol.feasibility_eps if eps is None else eps)

    def is_integral(self, a: Scalar) -> bool:
        if self.exact:
            return a.denominator == 1
        return abs(a - round(a)) <= self.tol.integrality_eps

    def fractionality(self, a: Scalar) -> Scalar:
        """Distance from ``a`` to the nearest integer."""
        return abs(a - round(a))

    def floor(self, a: Scalar) -> Scalar:
        return self.scalar(math.floor(a))

    def ceil(self, a: Scalar) -> Scalar:
        return self.scalar(math.ceil(a))

    def round_integral(self, a: Scalar) -> Scalar:
        """Snap a value that passed :meth:`is_integral` onto the integer."""
        return a if self.exact else float(round(a))

    def convert(self, x: Scalar) -> Scalar:
        """Re-express a scalar from either mode in this mode."""
        if self.exact:
            return _to_fraction(x)
        return float(x)

    def fmt(self, x: Scalar | None):
        """JSON-ready form: exact strings in rational mode, floats otherwise."""
        if x is None:
            return None
        if self.exact:
            x = _to_fraction(x)
            return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
        return float(x)


def dot(a: Sequence[Scalar], b: Sequence[Scalar]) -> Scalar:
    return sum((x * y for x, y in zip(a, b)), 0 * a[0] if a else 0)


def matvec(m: Sequence[Sequence[Scalar]], x: Sequence[Scalar]) -> tuple:
    return tuple(dot(row, x) for row in m)


def vec_add(a: Sequence[Scalar], b: Sequence[Scalar]) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


EXACT = Arithmetic(RATIONAL)
FLOATING = Arithmetic(FLOAT)
