"""Exact planar arithmetic over the rationals.

Points and vectors are plain ``(Rational, Rational)`` tuples so they hash and
compare exactly.  Every predicate here is the sign of a polynomial in the
inputs, evaluated without rounding.
"""
from __future__ import annotations

from fractions import Fraction

from gmpy2 import mpq as Rational
from math import gcd
from typing import Tuple, Union

Vec = Tuple["Rational", "Rational"]
Number = Union[int, Fraction, str]


_RATIONAL = type(Rational(0))


def q(x: Number) -> "Rational":
    """Parse an int, Fraction or ``"p/q"`` string into an exact rational."""
    if isinstance(x, _RATIONAL):
        return x
    if isinstance(x, Fraction):
        return Rational(x)
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return Rational(x)
    if isinstance(x, str):
        return Rational(x.strip())
    raise TypeError(f"cannot read {x!r} as an exact rational")


def vec(x: Number, y: Number) -> Vec:
    return (q(x), q(y))


def add(a: Vec, b: Vec) -> Vec:
    return (a[0] + b[0], a[1] + b[1])


def sub(a: Vec, b: Vec) -> Vec:
    return (a[0] - b[0], a[1] - b[1])


def scale(c: "Rational", a: Vec) -> Vec:
    return (c * a[0], c * a[1])


def neg(a: Vec) -> Vec:
    return (-a[0], -a[1])


def cross(a: Vec, b: Vec) -> "Rational":
    return a[0] * b[1] - a[1] * b[0]


def dot(a: Vec, b: Vec) -> "Rational":
    return a[0] * b[0] + a[1] * b[1]


def sign(x: "Rational") -> int:
    return (x > 0) - (x < 0)


def orient(a: Vec, b: Vec, c: Vec) -> int:
    """+1 if a, b, c turn counterclockwise, -1 clockwise, 0 collinear."""
    return sign(cross(sub(b, a), sub(c, a)))


def is_zero(a: Vec) -> bool:
    return a[0] == 0 and a[1] == 0


def same_direction(a: Vec, b: Vec) -> bool:
    """True when b is a positive multiple of a."""
    return cross(a, b) == 0 and dot(a, b) > 0


def parallel_ratio(a: Vec, b: Vec) -> "Rational":
    """The scalar r with b = r * a; a and b must be parallel and a nonzero."""
    if cross(a, b) != 0:
        raise ValueError("vectors are not parallel")
    return b[0] / a[0] if a[0] != 0 else b[1] / a[1]


def lerp(a: Vec, b: Vec, t: "Rational") -> Vec:
    return (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))


def midpoint(a: Vec, b: Vec) -> Vec:
    return lerp(a, b, Rational(1, 2))


def primitive(a: Vec) -> Tuple[int, int]:
    """Canonical integer representative of the ray spanned by a nonzero vector."""
    if is_zero(a):
        raise ValueError("zero vector has no direction")
    den = a[0].denominator * a[1].denominator
    x, y = int(a[0] * den), int(a[1] * den)
    g = gcd(x, y)
    return (x // g, y // g)


def slope_key(a: Vec) -> Tuple[int, int]:
    """Canonical representative of the line spanned by a (direction up to sign)."""
    x, y = primitive(a)
    if x < 0 or (x == 0 and y < 0):
        x, y = -x, -y
    return (x, y)


def line_intersection(p: Vec, d: Vec, a: Vec, b: Vec) -> Tuple["Rational", "Rational"]:
    """Parameters (s, t) with p + s d = a + t (b - a); lines must not be parallel."""
    e = sub(b, a)
    den = cross(d, e)
    if den == 0:
        raise ZeroDivisionError("parallel lines")
    w = sub(a, p)
    return cross(w, e) / den, cross(w, d) / den


def point_in_triangle(p: Vec, tri: Tuple[Vec, Vec, Vec]) -> Tuple[int, int, int]:
    """Orientation of p against each edge (i, i+1) of a counterclockwise triangle."""
    return tuple(orient(tri[i], tri[(i + 1) % 3], p) for i in range(3))  # type: ignore[return-value]


def fmt(x: "Rational") -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def fmt_vec(a: Vec) -> list:
    return [fmt(a[0]), fmt(a[1])]
