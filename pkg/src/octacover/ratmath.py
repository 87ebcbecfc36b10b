"""Exact rational scalars and small 3-vector helpers.

All geometry that feeds a verification result runs on exact rationals
(gmpy2.mpq when available, fractions.Fraction otherwise).  Float values
are promoted with ``rat(x)``, which is exact for binary floats.
"""

from __future__ import annotations

from typing import Iterable, Sequence, Tuple, Union

try:
    from gmpy2 import mpq as _mpq

    Rat = _mpq
except ImportError:  # pragma: no cover
    from fractions import Fraction as Rat  # type: ignore[assignment]

RatLike = Union[int, float, str, "Rat"]
Vec3 = Tuple["Rat", "Rat", "Rat"]

ZERO = Rat(0)
ONE = Rat(1)

#: default tolerance for float-track comparisons
FLOAT_TOL = 1e-9


def rat(x: RatLike) -> Rat:
    """Coerce to an exact rational.  Floats convert exactly (no rounding)."""
    if isinstance(x, Rat):
        return x
    if isinstance(x, str):
        return Rat(x)
    return Rat(x)


def rat_str(q: RatLike) -> str:
    """Canonical "p/q" (or integer) string."""
    return str(rat(q))


def vec3(p: Sequence[RatLike]) -> Vec3:
    if len(p) != 3:
        raise ValueError(f"expected 3 coordinates, got {len(p)}")
    return (rat(p[0]), rat(p[1]), rat(p[2]))


def vadd(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def vsub(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def vscale(s, a: Vec3) -> Vec3:
    return (s * a[0], s * a[1], s * a[2])


def dot(a: Vec3, b: Vec3):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def cross(a: Vec3, b: Vec3) -> Vec3:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def l1norm(a: Vec3):
    return abs(a[0]) + abs(a[1]) + abs(a[2])


def det3(a: Vec3, b: Vec3, c: Vec3):
    return dot(a, cross(b, c))


def solve3(rows: Sequence[Vec3], rhs: Sequence) -> Vec3 | None:
    """Solve a 3x3 rational linear system by Cramer's rule.

    Returns None when the matrix is singular.
    """
    a, b, c = rows
    d = det3(a, b, c)
    if d == 0:
        return None
    r = vec3(rhs)
    cols = tuple(zip(a, b, c))  # columns of the matrix
    x = det3(r, cols[1], cols[2]) / d
    y = det3(cols[0], r, cols[2]) / d
    z = det3(cols[0], cols[1], r) / d
    return (x, y, z)


def primitive(coeffs: Iterable) -> tuple:
    """Scale rational coefficients to coprime integers, preserving sign."""
    from math import gcd

    qs = [rat(c) for c in coeffs]
    lcm = 1
    for q in qs:
        d = int(q.denominator)
        lcm = lcm // gcd(lcm, d) * d
    ints = [int(q * lcm) for q in qs]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g > 1:
        ints = [v // g for v in ints]
    return tuple(ints)


def mean(points: Sequence[Vec3]) -> Vec3:
    n = Rat(len(points))
    sx = sum(p[0] for p in points)
    sy = sum(p[1] for p in points)
    sz = sum(p[2] for p in points)
    return (sx / n, sy / n, sz / n)
