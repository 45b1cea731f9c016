"""Exact planar predicates on homogeneous integer coordinates.

Input floats are read as their shortest decimal representation (the value a
WKT string spells out), scaled by a common power of ten and stored as
``(X, Y, W)`` integer triples with ``W > 0``.  Intersection points and
midpoints stay rational in the same representation, so every orientation,
containment and equality test below is exact.
"""
from __future__ import annotations

from decimal import Decimal
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, Sequence

HPoint = tuple[int, int, int]


@lru_cache(maxsize=1 << 16)
def decimal_parts(x: float) -> tuple[int, int]:
    """Return ``(mantissa, exponent)`` with ``x == mantissa * 10**exponent``
    for the shortest repr of ``x``."""
    sign, digits, exp = Decimal(repr(float(x))).as_tuple()
    m = int("".join(map(str, digits))) if digits else 0
    return (-m if sign else m), int(exp)


class Scale:
    """Common decimal scale for a set of float coordinates."""

    __slots__ = ("k",)

    def __init__(self, values: Iterable[float]):
        k = 0
        for v in values:
            e = decimal_parts(v)[1]
            if -e > k:
                k = -e
        self.k = k

    def point(self, xy: Sequence[float]) -> HPoint:
        return (self._int(xy[0]), self._int(xy[1]), 1)

    def _int(self, v: float) -> int:
        m, e = decimal_parts(v)
        return m * 10 ** (e + self.k)

    def to_float(self, p: HPoint) -> tuple[float, float]:
        d = p[2] * 10**self.k
        return float(Fraction(p[0], d)), float(Fraction(p[1], d))


def normalize(x: int, y: int, w: int) -> HPoint:
    if w < 0:
        x, y, w = -x, -y, -w
    g = gcd(x, y, w)
    if g > 1:
        return (x // g, y // g, w // g)
    return (x, y, w)


def orient(p: HPoint, q: HPoint, r: HPoint) -> int:
    """Sign of the turn p -> q -> r: +1 left (ccw), -1 right, 0 collinear."""
    xp, yp, wp = p
    xq, yq, wq = q
    xr, yr, wr = r
    if wp == 1 and wq == 1 and wr == 1:
        d = (xq - xp) * (yr - yp) - (yq - yp) * (xr - xp)
    else:
        d = xp * (yq * wr - yr * wq) - yp * (xq * wr - xr * wq) + wp * (xq * yr - xr * yq)
    return (d > 0) - (d < 0)


def _lt(a: int, wa: int, b: int, wb: int) -> bool:
    return a * wb < b * wa


def _le(a: int, wa: int, b: int, wb: int) -> bool:
    return a * wb <= b * wa


def in_box(p: HPoint, a: HPoint, b: HPoint) -> bool:
    """Whether p lies in the closed axis-aligned box spanned by a and b."""
    px, py, pw = p
    ax, ay, aw = a
    bx, by, bw = b
    if _lt(bx, bw, ax, aw):
        ax, aw, bx, bw = bx, bw, ax, aw
    if not (_le(ax, aw, px, pw) and _le(px, pw, bx, bw)):
        return False
    ay, by = a[1], b[1]
    aw2, bw2 = a[2], b[2]
    if _lt(by, bw2, ay, aw2):
        ay, aw2, by, bw2 = by, bw2, ay, aw2
    return _le(ay, aw2, py, pw) and _le(py, pw, by, bw2)


def on_segment(p: HPoint, a: HPoint, b: HPoint) -> bool:
    return orient(a, b, p) == 0 and in_box(p, a, b)


def same(p: HPoint, q: HPoint) -> bool:
    return p[0] * q[2] == q[0] * p[2] and p[1] * q[2] == q[1] * p[2]


def midpoint(a: HPoint, b: HPoint) -> HPoint:
    return normalize(a[0] * b[2] + b[0] * a[2], a[1] * b[2] + b[1] * a[2], 2 * a[2] * b[2])


def lerp(a: HPoint, b: HPoint, t: Fraction) -> HPoint:
    """Point ``a + t (b - a)`` for rational t."""
    n, d = t.numerator, t.denominator
    w = a[2] * b[2] * d
    x = a[0] * b[2] * (d - n) + b[0] * a[2] * n
    y = a[1] * b[2] * (d - n) + b[1] * a[2] * n
    return normalize(x, y, w)


def _cross(p: HPoint, q: HPoint) -> tuple[int, int, int]:
    return (
        p[1] * q[2] - p[2] * q[1],
        p[2] * q[0] - p[0] * q[2],
        p[0] * q[1] - p[1] * q[0],
    )


def intersect(a1: HPoint, a2: HPoint, b1: HPoint, b2: HPoint) -> list[HPoint]:
    """Intersection of closed segments a1a2 and b1b2.

    Returns no point, the single shared point, or the two end points of a
    collinear overlap (one point when the overlap degenerates)."""
    o1 = orient(a1, a2, b1)
    o2 = orient(a1, a2, b2)
    if o1 == o2 != 0:
        return []
    o3 = orient(b1, b2, a1)
    o4 = orient(b1, b2, a2)
    if o3 == o4 != 0:
        return []
    if o1 == 0 and o2 == 0:
        out: list[HPoint] = []
        for p, s, t in ((b1, a1, a2), (b2, a1, a2), (a1, b1, b2), (a2, b1, b2)):
            if in_box(p, s, t) and not any(same(p, q) for q in out):
                out.append(p)
        return out
    if o1 == 0:
        return [b1] if in_box(b1, a1, a2) else []
    if o2 == 0:
        return [b2] if in_box(b2, a1, a2) else []
    if o3 == 0:
        return [a1] if in_box(a1, b1, b2) else []
    if o4 == 0:
        return [a2] if in_box(a2, b1, b2) else []
    x, y, w = _cross(_cross(a1, a2), _cross(b1, b2))
    return [normalize(x, y, w)]


def param_key(a: HPoint, b: HPoint):
    """Sort key ordering points of segment ab from a towards b."""
    ax, ay, aw = a
    bx, by, bw = b
    if ax * bw != bx * aw:
        sgn = 1 if _lt(ax, aw, bx, bw) else -1
        return lambda p: sgn * Fraction(p[0], p[2])
    sgn = 1 if _lt(ay, aw, by, bw) else -1
    return lambda p: sgn * Fraction(p[1], p[2])


def signed_area2(ring: Sequence[HPoint]) -> Fraction:
    """Twice the signed area of a closed ring (first == last)."""
    s = Fraction(0)
    for p, q in zip(ring, ring[1:]):
        s += Fraction(p[0] * q[1] - q[0] * p[1], p[2] * q[2])
    return s


def ring_location(p: HPoint, ring: Sequence[HPoint]) -> int:
    """Locate p against a closed ring: 1 inside, 0 on the ring, -1 outside."""
    inside = False
    px, py, pw = p
    for a, b in zip(ring, ring[1:]):
        if on_segment(p, a, b):
            return 0
        a_above = a[1] * pw > py * a[2]
        b_above = b[1] * pw > py * b[2]
        if a_above != b_above:
            o = orient(a, b, p)
            if b_above and o > 0:
                inside = not inside
            elif a_above and o < 0:
                inside = not inside
    return 1 if inside else -1


def dedupe_consecutive(points: Sequence[HPoint]) -> list[HPoint]:
    out: list[HPoint] = []
    for p in points:
        if not out or not same(out[-1], p):
            out.append(p)
    return out
