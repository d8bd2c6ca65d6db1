"""Parsing and conversion helpers for exact rational inputs."""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

import numpy as np


def parse_rational(value) -> tuple[Fraction, bool]:
    """Parse ``value`` into a Fraction.

    Returns ``(fraction, exact)`` where ``exact`` is False when the input was a
    binary float that had to be converted. ``"p/q"`` strings and decimal strings
    are exact.
    """
    if isinstance(value, Fraction):
        return value, True
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value)), True
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text), True
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse {value!r} as a rational") from exc
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(float(value)), False
    raise TypeError(f"unsupported numeric type {type(value).__name__}")


def as_rational(value) -> Fraction:
    return parse_rational(value)[0]


def is_exact(value) -> bool:
    return isinstance(value, (Rational, np.integer)) and not isinstance(value, bool)


def to_str(value) -> str:
    """Serialise a number: ``"p/q"`` for rationals, repr for floats."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def exact_sqrt(q: Fraction) -> Fraction | None:
    """Square root of a nonnegative Fraction when it is itself rational."""
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def exactify(value):
    """Promote Python/numpy integers to Fraction; leave everything else alone."""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return Fraction(int(value))
    return value
