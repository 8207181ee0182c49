"""Arithmetic backends for the Laurent recursion.

Three modes are available:

``rational``
    exact ``gmpy2.mpq`` arithmetic.
``float``
    ``gmpy2.mpfr`` with a configurable number of decimal digits.
``double``
    IEEE doubles; used by the vectorized kernel when the trial frequency
    is scanned many times.
"""
from __future__ import annotations

import contextlib
import math
import re
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from numbers import Rational

import gmpy2

from .errors import IrrationalInExactMode, ValidationError

RATIONAL = "rational"
FLOAT = "float"
DOUBLE = "double"
MODES = (RATIONAL, FLOAT, DOUBLE)

GUARD_BITS = 32

_SQRT_RE = re.compile(r"^\s*sqrt\s*\((.*)\)\s*$")


def _fraction_sqrt(q: Fraction) -> Fraction | None:
    num, den = q.numerator, q.denominator
    if gmpy2.is_square(num) and gmpy2.is_square(den):
        return Fraction(int(gmpy2.isqrt(num)), int(gmpy2.isqrt(den)))
    return None


@dataclass(frozen=True)
class SqrtOf:
    """Exact square root of a non-negative rational.

    Used for frequencies such as ``2*sqrt(V2)`` whose square is rational
    but which are not rational themselves.
    """

    radicand: Fraction

    def __post_init__(self):
        r = to_fraction(self.radicand)
        if r < 0:
            raise ValidationError(f"negative radicand {r}")
        object.__setattr__(self, "radicand", r)

    def exact(self) -> Fraction | None:
        return _fraction_sqrt(self.radicand)

    def __float__(self) -> float:
        return math.sqrt(float(self.radicand))

    def __str__(self) -> str:
        return f"sqrt({_fraction_str(self.radicand)})"


def _fraction_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def to_fraction(value) -> Fraction:
    """Convert an input number to an exact ``Fraction``.

    Strings may be integers, decimals (``"0.01"``, ``"1e-3"``) or ratios
    (``"3/7"``). Floats are converted through their shortest repr, so
    ``0.1`` becomes ``1/10``.
    """
    if isinstance(value, bool):
        raise ValidationError("booleans are not numbers")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValidationError(f"non-finite value {value!r}")
        return Fraction(repr(value))
    if isinstance(value, Decimal):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"cannot parse number {value!r}") from exc
    if type(value).__name__ == "mpq" or isinstance(value, Rational):
        return Fraction(int(value.numerator), int(value.denominator))
    if type(value).__name__ == "mpfr":
        if not gmpy2.is_finite(value):
            raise ValidationError(f"non-finite value {value!r}")
        return Fraction(*(int(t) for t in value.as_integer_ratio()))
    raise ValidationError(f"unsupported number type {type(value).__name__}")


def to_exact(value) -> Fraction | SqrtOf:
    """Like `to_fraction` but also accepts ``"sqrt(q)"`` and `SqrtOf`.

    A square root of a perfect square collapses to a ``Fraction``.
    """
    if isinstance(value, SqrtOf):
        root = value.exact()
        return value if root is None else root
    if isinstance(value, str):
        m = _SQRT_RE.match(value)
        if m:
            return to_exact(SqrtOf(to_fraction(m.group(1))))
    return to_fraction(value)


def exact_str(value: Fraction | SqrtOf) -> str:
    if isinstance(value, SqrtOf):
        return str(value)
    return _fraction_str(value)


def exact_square(value: Fraction | SqrtOf) -> Fraction:
    if isinstance(value, SqrtOf):
        return value.radicand
    return value * value


@dataclass(frozen=True)
class NumericContext:
    """Arithmetic mode plus working precision.

    Parameters
    ----------
    mode : {"rational", "float", "double"}
    precision_digits : int
        Significant decimal digits carried in ``float`` mode. Ignored
        otherwise.
    """

    mode: str = FLOAT
    precision_digits: int = 64

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(f"unknown numeric mode {self.mode!r}; expected one of {MODES}")
        if int(self.precision_digits) < 1:
            raise ValidationError("precision_digits must be positive")

    @property
    def bits(self) -> int:
        return int(math.ceil(self.precision_digits * math.log2(10))) + GUARD_BITS

    @property
    def exact(self) -> bool:
        return self.mode == RATIONAL

    def local(self):
        """Context manager that activates the working precision."""
        if self.mode == FLOAT:
            return gmpy2.context(gmpy2.get_context(), precision=self.bits)
        return contextlib.nullcontext()

    def number(self, value):
        """Convert ``value`` into this context's number type.

        Must be called inside `local` for float mode.
        """
        if self.mode == DOUBLE:
            return float(to_exact(value) if isinstance(value, str) else value)
        if self.mode == RATIONAL:
            if isinstance(value, type(gmpy2.mpq())):
                return value
            ex = to_exact(value)
            if isinstance(ex, SqrtOf):
                raise IrrationalInExactMode(f"{ex} is irrational; use float mode")
            return gmpy2.mpq(ex.numerator, ex.denominator)
        if isinstance(value, float):
            return gmpy2.mpfr(value)
        if type(value).__name__ == "mpfr":
            return +value
        ex = to_exact(value)
        if isinstance(ex, SqrtOf):
            return gmpy2.sqrt(gmpy2.mpfr(gmpy2.mpq(ex.radicand.numerator, ex.radicand.denominator)))
        return gmpy2.mpfr(gmpy2.mpq(ex.numerator, ex.denominator))

    def zero(self):
        return self.number(0)

    def is_representable(self, value) -> bool:
        if self.mode != RATIONAL:
            return True
        try:
            self.number(value)
        except IrrationalInExactMode:
            return False
        return True

    def format(self, value) -> str:
        """Full-precision decimal (or exact ratio) string of a context number."""
        if self.mode == RATIONAL:
            return _fraction_str(to_fraction(value))
        if self.mode == DOUBLE:
            return repr(float(value) + 0.0)  # no "-0.0"
        with self.local():
            return format(gmpy2.mpfr(value), f".{self.precision_digits}g")

