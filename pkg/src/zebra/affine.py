from __future__ import annotations

from dataclasses import dataclass

from .exact import Rational, Vec, add, fmt, fmt_vec, scale, sub


@dataclass(frozen=True)
class AffineMap:
    """x -> a*x + b with a nonzero rational scalar a."""

    a: Rational
    b: Vec

    def __post_init__(self) -> None:
        if self.a == 0:
            raise ValueError("affine map must be invertible")

    @staticmethod
    def identity() -> "AffineMap":
        return AffineMap(Rational(1), (Rational(0), Rational(0)))

    def __call__(self, x: Vec) -> Vec:
        return add(scale(self.a, x), self.b)

    def linear(self, d: Vec) -> Vec:
        return scale(self.a, d)

    def compose(self, inner: "AffineMap") -> "AffineMap":
        """self after inner."""
        return AffineMap(self.a * inner.a, self(inner.b))

    def inverse(self) -> "AffineMap":
        ia = 1 / self.a
        return AffineMap(ia, scale(-ia, self.b))

    def fixed_point(self) -> Vec:
        if self.a == 1:
            raise ValueError("translations have no fixed point")
        return scale(1 / (1 - self.a), self.b)

    def to_json(self) -> dict:
        return {"a": fmt(self.a), "b": fmt_vec(self.b)}


def map_from_edges(p0: Vec, p1: Vec, q0: Vec, q1: Vec) -> AffineMap:
    """The map sending p0 -> q0 and p1 -> q1 (segments must be parallel)."""
    d, e = sub(p1, p0), sub(q1, q0)
    if d[0] * e[1] - d[1] * e[0] != 0:
        raise ValueError("segments are not parallel")
    a = e[0] / d[0] if d[0] != 0 else e[1] / d[1]
    return AffineMap(a, sub(q0, scale(a, p0)))
