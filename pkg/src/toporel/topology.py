"""DE-9IM intersection matrices and the seven named topological predicates.

The matrix is computed by noding every segment of both geometries against
every other segment, then locating each node and each sub-segment midpoint in
both operands.  Area/area entries follow from which side of a boundary edge
each polygon interior lies on.  All tests run on exact integer coordinates
(see ``_exact``), so degenerate configurations such as collinear extra
vertices classify exactly.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Union

from . import _exact
from .geometry import (
    SIMPLE_TYPES,
    Geometry,
    LineString,
    MultiLineString,
    MultiPoint,
    MultiPolygon,
    Point,
    Polygon,
    base_type,
)

__all__ = [
    "IntersectionMatrix",
    "Predicate",
    "Undetermined",
    "InvalidGeometry",
    "PatternError",
    "relate",
    "matches",
    "classify",
    "inverse",
    "valid_combinations",
    "all_combinations",
    "PREDICATES",
    "PATTERNS",
]


class InvalidGeometry(ValueError):
    """Operand is empty or violates a validity rule."""


class PatternError(ValueError):
    """Malformed 9-character DE-9IM pattern."""


class Predicate(str, enum.Enum):
    EQUALS = "equals"
    WITHIN = "within"
    CONTAINS = "contains"
    OVERLAPS = "overlaps"
    TOUCHES = "touches"
    CROSSES = "crosses"
    DISJOINT = "disjoint"

    def __str__(self) -> str:
        return self.value


# fixed reporting order
PREDICATES: tuple[Predicate, ...] = tuple(Predicate)

# Boolean codes as printed for each predicate; the dimension-aware forms used
# by classify() live in _DECISIONS.
PATTERNS: dict[Predicate, tuple[str, ...]] = {
    Predicate.EQUALS: ("T*F**FFF*",),
    Predicate.WITHIN: ("T*F**F***",),
    Predicate.CONTAINS: ("T*****FF*",),
    Predicate.OVERLAPS: ("T*T***T**",),
    Predicate.TOUCHES: ("FT*******", "F**T*****", "F***T****"),
    Predicate.CROSSES: ("T*T******",),
    Predicate.DISJOINT: ("FF*FF****",),
}

_ROWS = {"I": 0, "B": 1, "E": 2}


@dataclass(frozen=True)
class IntersectionMatrix:
    """3x3 DE-9IM matrix; rows/columns are interior, boundary, exterior."""

    code: str

    def __post_init__(self):
        if len(self.code) != 9 or any(c not in "F012" for c in self.code):
            raise ValueError(f"bad intersection matrix {self.code!r}")

    def __str__(self) -> str:
        return self.code

    def __getitem__(self, i: int) -> str:
        return self.code[i]

    def entry(self, row: str, col: str) -> str:
        """Entry by part names, e.g. ``entry('I', 'B')``."""
        return self.code[3 * _ROWS[row] + _ROWS[col]]

    def transpose(self) -> "IntersectionMatrix":
        c = self.code
        return IntersectionMatrix("".join(c[3 * j + i] for i in range(3) for j in range(3)))

    def matches(self, pattern: str) -> bool:
        return matches(self, pattern)


def matches(m: Union[IntersectionMatrix, str], pattern: str) -> bool:
    """True iff every matrix entry satisfies the pattern character
    (``T`` non-empty, ``F`` empty, digit exact, ``*`` anything)."""
    if len(pattern) != 9 or any(c not in "TF*012" for c in pattern.upper()):
        raise PatternError(f"bad DE-9IM pattern {pattern!r}")
    code = str(m)
    for e, p in zip(code, pattern.upper()):
        if p == "*":
            continue
        if p == "T":
            if e == "F":
                return False
        elif p != e:
            return False
    return True


@dataclass(frozen=True)
class Undetermined:
    """Fallback when no named predicate matches; carries the raw matrix."""

    matrix: IntersectionMatrix
    value = "undetermined"

    def __str__(self) -> str:
        return f"undetermined({self.matrix})"


# -- exact decomposition -----------------------------------------------------


class _Prepared:
    """One operand in exact coordinates, ready for point location."""

    def __init__(self, g: Geometry, scale: _exact.Scale):
        self.dim = 0
        self.points: list = []  # isolated points (puntal)
        self.segments: list = []  # (a, b) pairs
        self.boundary_nodes: set = set()  # line end points on the mod-2 boundary
        self.polygons: list = []  # [shell, *holes], shell ccw, holes cw
        if isinstance(g, (Point, MultiPoint)):
            self.points = list({_exact.normalize(*scale.point(c)) for c in g.coords()})
        elif isinstance(g, (LineString, MultiLineString)):
            self.dim = 1
            lines = [g] if isinstance(g, LineString) else list(g.lines)
            ends: dict = {}
            for line in lines:
                pts = _exact.dedupe_consecutive([scale.point(c) for c in line.points])
                self.segments.extend(zip(pts, pts[1:]))
                if not _exact.same(pts[0], pts[-1]):
                    for e in (pts[0], pts[-1]):
                        ends[e] = ends.get(e, 0) + 1
            self.boundary_nodes = {p for p, n in ends.items() if n % 2}
        else:
            self.dim = 2
            polys = [g] if isinstance(g, Polygon) else list(g.polygons)
            for poly in polys:
                rings = []
                for i, ring in enumerate(poly.rings):
                    pts = _exact.dedupe_consecutive([scale.point(c) for c in ring])
                    ccw = _exact.signed_area2(pts) > 0
                    if ccw != (i == 0):
                        pts.reverse()
                    rings.append(pts)
                    self.segments.extend(zip(pts, pts[1:]))
                self.polygons.append(rings)
        xs = [p[0] for s in self.segments for p in s] + [p[0] for p in self.points]
        ys = [p[1] for s in self.segments for p in s] + [p[1] for p in self.points]
        # input points have W == 1 so the box is exact
        self.box = (min(xs), min(ys), max(xs), max(ys))

    def locate(self, p) -> str:
        if self.dim == 0:
            return "I" if any(_exact.same(p, q) for q in self.points) else "E"
        if self.dim == 1:
            for a, b in self.segments:
                if _exact.on_segment(p, a, b):
                    if any(_exact.same(p, e) for e in self.boundary_nodes):
                        return "B"
                    return "I"
            return "E"
        for rings in self.polygons:
            loc = _exact.ring_location(p, rings[0])
            if loc == 0:
                return "B"
            if loc < 0:
                continue
            for hole in rings[1:]:
                h = _exact.ring_location(p, hole)
                if h == 0:
                    return "B"
                if h > 0:
                    break
            else:
                return "I"
        return "E"

    def edge_through(self, p, a, b) -> int:
        """+1/-1 when a boundary edge through p runs with/against a->b."""
        dx, dy = b[0] * a[2] - a[0] * b[2], b[1] * a[2] - a[1] * b[2]
        for e1, e2 in self.segments:
            if _exact.on_segment(p, e1, e2):
                ex, ey = e2[0] * e1[2] - e1[0] * e2[2], e2[1] * e1[2] - e1[1] * e2[2]
                dot = dx * ex + dy * ey
                if dot:
                    return 1 if dot > 0 else -1
        return 0


def _boxes_meet(s, t) -> bool:
    # segments as ((x, y, w), (x, y, w)); compare via floats with a safety margin
    (a1, a2), (b1, b2) = s, t
    ax = (a1[0] / a1[2], a2[0] / a2[2])
    bx = (b1[0] / b1[2], b2[0] / b2[2])
    tol = 1e-9 * (1.0 + abs(ax[0]) + abs(bx[0]))
    if max(ax) < min(bx) - tol or max(bx) < min(ax) - tol:
        return False
    ay = (a1[1] / a1[2], a2[1] / a2[2])
    by = (b1[1] / b1[2], b2[1] / b2[2])
    tol = 1e-9 * (1.0 + abs(ay[0]) + abs(by[0]))
    return not (max(ay) < min(by) - tol or max(by) < min(ay) - tol)


def _check(g: Geometry, name: str) -> None:
    if not isinstance(g, Geometry):
        raise TypeError(f"{name} is not a geometry: {g!r}")
    if g.is_empty:
        raise InvalidGeometry(f"{name} is empty")
    if not g.is_valid:
        raise InvalidGeometry(f"{name} is invalid: " + "; ".join(map(str, g.violations)))


def relate(a: Geometry, b: Geometry, check: bool = True) -> IntersectionMatrix:
    """DE-9IM matrix of ``a`` against ``b``."""
    if check:
        _check(a, "a")
        _check(b, "b")
    scale = _exact.Scale(v for g in (a, b) for c in g.coords() for v in c)
    pa, pb = _Prepared(a, scale), _Prepared(b, scale)
    m = [-1] * 9

    def mark(la: str, lb: str, d: int) -> None:
        i = 3 * _ROWS[la] + _ROWS[lb]
        if m[i] < d:
            m[i] = d

    m[8] = 2
    if pa.dim == 2 and pb.dim < 2:
        mark("I", "E", 2)
    if pb.dim == 2 and pa.dim < 2:
        mark("E", "I", 2)

    # far-apart operands: only the part dimensions matter
    if (pa.box[2] < pb.box[0] or pb.box[2] < pa.box[0] or pa.box[3] < pb.box[1] or pb.box[3] < pa.box[1]):
        _mark_disjoint(pa, pb, mark)
        return _to_matrix(m)

    owners = [(s, 0) for s in pa.segments] + [(s, 1) for s in pb.segments]
    isolated = pa.points + pb.points
    nodes: set = set(isolated)
    pieces = []
    for i, (seg, own) in enumerate(owners):
        a1, a2 = seg
        cuts = [a1, a2]
        for j, (other, _) in enumerate(owners):
            if i != j and _boxes_meet(seg, other):
                cuts.extend(_exact.intersect(a1, a2, other[0], other[1]))
        cuts.extend(p for p in isolated if _exact.on_segment(p, a1, a2))
        cuts = [_exact.normalize(*p) for p in cuts]
        cuts = sorted(set(cuts), key=_exact.param_key(a1, a2))
        nodes.update(cuts)
        pieces.extend((p, q, own, a1, a2) for p, q in zip(cuts, cuts[1:]))

    for p in nodes:
        mark(pa.locate(p), pb.locate(p), 0)

    both_areal = pa.dim == 2 and pb.dim == 2
    for p, q, own, a1, a2 in pieces:
        mid = _exact.midpoint(p, q)
        la, lb = pa.locate(mid), pb.locate(mid)
        mark(la, lb, 1)
        if not both_areal:
            continue
        if own == 0:
            if lb == "I":
                mark("I", "I", 2)
                mark("E", "I", 2)
            elif lb == "E":
                mark("I", "E", 2)
            else:
                # shared edge: interiors on the same side iff the rings run the same way
                if pb.edge_through(mid, a1, a2) > 0:
                    mark("I", "I", 2)
                else:
                    mark("I", "E", 2)
                    mark("E", "I", 2)
        else:
            if la == "I":
                mark("I", "I", 2)
                mark("I", "E", 2)
            elif la == "E":
                mark("E", "I", 2)
    return _to_matrix(m)


def _mark_disjoint(pa: _Prepared, pb: _Prepared, mark) -> None:
    for own, other, flip in ((pa, pb, False), (pb, pa, True)):
        parts = {0: [("I", 0)], 1: [("I", 1)], 2: [("I", 2), ("B", 1)]}[own.dim]
        if own.dim == 1 and own.boundary_nodes:
            parts.append(("B", 0))
        for part, d in parts:
            if flip:
                mark("E", part, d)
            else:
                mark(part, "E", d)


def _to_matrix(m: list[int]) -> IntersectionMatrix:
    return IntersectionMatrix("".join("F" if v < 0 else str(v) for v in m))


# -- classification ----------------------------------------------------------


def _dims(a: Geometry, b: Geometry) -> tuple[int, int]:
    return a.dimension, b.dimension


def _crosses(m: IntersectionMatrix, da: int, db: int) -> bool:
    if da < db:
        return matches(m, "T*T******")
    if da > db:
        return matches(m, "T*****T**")
    return da == 1 and matches(m, "0********")


def _overlaps(m: IntersectionMatrix, da: int, db: int) -> bool:
    if da != db:
        return False
    if da == 1:
        return matches(m, "1*T***T**")
    return matches(m, "T*T***T**")


def _touches(m: IntersectionMatrix, da: int, db: int) -> bool:
    if da == 0 and db == 0:
        return False
    return any(matches(m, p) for p in PATTERNS[Predicate.TOUCHES])


def predicate_of(m: IntersectionMatrix, da: int, db: int) -> Union[Predicate, Undetermined]:
    """Map a matrix to exactly one predicate, testing in the fixed order
    equals, within, contains, crosses, overlaps, touches, disjoint."""
    if matches(m, "T*F**FFF*"):
        return Predicate.EQUALS
    if matches(m, "T*F**F***"):
        return Predicate.WITHIN
    if matches(m, "T*****FF*"):
        return Predicate.CONTAINS
    if _crosses(m, da, db):
        return Predicate.CROSSES
    if _overlaps(m, da, db):
        return Predicate.OVERLAPS
    if _touches(m, da, db):
        return Predicate.TOUCHES
    if matches(m, "FF*FF****"):
        return Predicate.DISJOINT
    return Undetermined(m)


def classify(a: Geometry, b: Geometry, check: bool = True) -> Union[Predicate, Undetermined]:
    """The single topological predicate relating ``a`` (subject) to ``b``."""
    m = relate(a, b, check=check)
    return predicate_of(m, a.dimension, b.dimension)


def inverse(p: Predicate) -> Predicate:
    p = Predicate(p)
    if p is Predicate.WITHIN:
        return Predicate.CONTAINS
    if p is Predicate.CONTAINS:
        return Predicate.WITHIN
    return p


_P, _L, _A = SIMPLE_TYPES
_COMBOS: dict[Predicate, frozenset[tuple[str, str]]] = {
    Predicate.EQUALS: frozenset({(_P, _P), (_L, _L), (_A, _A)}),
    Predicate.WITHIN: frozenset({(_P, _L), (_P, _A), (_L, _L), (_L, _A), (_A, _A)}),
    Predicate.CONTAINS: frozenset({(_L, _P), (_L, _L), (_A, _P), (_A, _L), (_A, _A)}),
    Predicate.OVERLAPS: frozenset({(_L, _L), (_A, _A)}),
    Predicate.TOUCHES: frozenset(
        {(_P, _L), (_P, _A), (_L, _P), (_L, _L), (_L, _A), (_A, _P), (_A, _L), (_A, _A)}
    ),
    Predicate.CROSSES: frozenset({(_L, _L), (_L, _A), (_A, _L)}),
    Predicate.DISJOINT: frozenset((x, y) for x in SIMPLE_TYPES for y in SIMPLE_TYPES),
}


def valid_combinations(p: Predicate) -> frozenset[tuple[str, str]]:
    """Geometry-type pairs (subject, object) for which ``p`` can hold."""
    return _COMBOS[Predicate(p)]


def all_combinations(include_disjoint: bool = True) -> list[tuple[str, Predicate, str]]:
    """The (type_a, predicate, type_b) label space in a fixed order."""
    out = []
    for p in PREDICATES:
        if p is Predicate.DISJOINT and not include_disjoint:
            continue
        for ta in SIMPLE_TYPES:
            for tb in SIMPLE_TYPES:
                if (ta, tb) in _COMBOS[p]:
                    out.append((ta, p, tb))
    return out


def is_valid_combination(type_a: str, predicate, type_b: str) -> bool:
    try:
        p = Predicate(predicate)
    except ValueError:
        return False
    return (base_type(type_a), base_type(type_b)) in _COMBOS[p]


def applicable_predicates(type_a: str, type_b: str) -> list[Predicate]:
    combo = (base_type(type_a), base_type(type_b))
    return [p for p in PREDICATES if combo in _COMBOS[p]]
