"""Planar simple-feature geometries (2D, immutable)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Optional, Sequence, Union

from . import _exact

Coord = tuple[float, float]

TYPE_NAMES = ("Point", "LineString", "Polygon", "MultiPoint", "MultiLineString", "MultiPolygon")
SIMPLE_TYPES = ("Point", "LineString", "Polygon")


class GeometryError(ValueError):
    """Structural invariant violated while constructing a geometry."""


def _coord(c: Sequence[float]) -> Coord:
    if len(c) != 2:
        raise GeometryError(f"expected an (x, y) pair, got {tuple(c)!r}")
    return (float(c[0]), float(c[1]))


def _coords(seq: Sequence[Sequence[float]]) -> tuple[Coord, ...]:
    return tuple(_coord(c) for c in seq)


def _ring(seq: Sequence[Sequence[float]]) -> tuple[Coord, ...]:
    ring = _coords(seq)
    if len(ring) < 4:
        raise GeometryError(f"ring needs at least 4 coordinates, got {len(ring)}")
    if ring[0] != ring[-1]:
        raise GeometryError("ring is not closed (first coordinate != last)")
    return ring


class Geometry:
    """Common behaviour of the six geometry classes."""

    geom_type: str = ""

    @property
    def is_empty(self) -> bool:
        raise NotImplementedError

    def coords(self) -> Iterator[Coord]:
        """Every coordinate of the geometry, rings included."""
        raise NotImplementedError

    @property
    def dimension(self) -> Optional[int]:
        return dimension(self)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        xs, ys = zip(*self.coords())
        return min(xs), min(ys), max(xs), max(ys)

    @cached_property
    def violations(self) -> tuple["Violation", ...]:
        return tuple(_validate(self))

    @property
    def is_valid(self) -> bool:
        return not self.violations

    def wkt(self, precision: Optional[int] = 6) -> str:
        from .wkt import to_wkt

        return to_wkt(self, precision)

    def __str__(self) -> str:
        return self.wkt()


@dataclass(frozen=True, eq=True)
class Point(Geometry):
    x: Optional[float] = None
    y: Optional[float] = None
    geom_type = "Point"

    def __post_init__(self):
        if (self.x is None) != (self.y is None):
            raise GeometryError("a point needs both x and y")
        if self.x is not None:
            object.__setattr__(self, "x", float(self.x))
            object.__setattr__(self, "y", float(self.y))

    @property
    def is_empty(self) -> bool:
        return self.x is None

    def coords(self) -> Iterator[Coord]:
        if not self.is_empty:
            yield (self.x, self.y)


@dataclass(frozen=True, eq=True)
class MultiPoint(Geometry):
    points: tuple[Coord, ...] = ()
    geom_type = "MultiPoint"

    def __post_init__(self):
        object.__setattr__(self, "points", _coords(self.points))

    @property
    def is_empty(self) -> bool:
        return not self.points

    def coords(self) -> Iterator[Coord]:
        yield from self.points


@dataclass(frozen=True, eq=True)
class LineString(Geometry):
    points: tuple[Coord, ...] = ()
    geom_type = "LineString"

    def __post_init__(self):
        pts = _coords(self.points)
        if pts and len(pts) < 2:
            raise GeometryError(f"LineString needs at least 2 coordinates, got {len(pts)}")
        object.__setattr__(self, "points", pts)

    @property
    def is_empty(self) -> bool:
        return not self.points

    @property
    def is_closed(self) -> bool:
        return bool(self.points) and self.points[0] == self.points[-1]

    def coords(self) -> Iterator[Coord]:
        yield from self.points

    @property
    def length(self) -> float:
        return sum(math.dist(p, q) for p, q in zip(self.points, self.points[1:]))


@dataclass(frozen=True, eq=True)
class MultiLineString(Geometry):
    lines: tuple[LineString, ...] = ()
    geom_type = "MultiLineString"

    def __post_init__(self):
        lines = tuple(l if isinstance(l, LineString) else LineString(l) for l in self.lines)
        if any(l.is_empty for l in lines):
            raise GeometryError("MultiLineString members must be non-empty")
        object.__setattr__(self, "lines", lines)

    @property
    def is_empty(self) -> bool:
        return not self.lines

    def coords(self) -> Iterator[Coord]:
        for line in self.lines:
            yield from line.points


@dataclass(frozen=True, eq=True)
class Polygon(Geometry):
    shell: tuple[Coord, ...] = ()
    holes: tuple[tuple[Coord, ...], ...] = field(default=())
    geom_type = "Polygon"

    def __post_init__(self):
        if not self.shell:
            if self.holes:
                raise GeometryError("an empty polygon cannot have holes")
            object.__setattr__(self, "shell", ())
            object.__setattr__(self, "holes", ())
            return
        object.__setattr__(self, "shell", _ring(self.shell))
        object.__setattr__(self, "holes", tuple(_ring(h) for h in self.holes))

    @property
    def is_empty(self) -> bool:
        return not self.shell

    @property
    def rings(self) -> tuple[tuple[Coord, ...], ...]:
        return (self.shell, *self.holes) if self.shell else ()

    def coords(self) -> Iterator[Coord]:
        for ring in self.rings:
            yield from ring

    @property
    def area(self) -> float:
        return abs(_shoelace(self.shell)) - sum(abs(_shoelace(h)) for h in self.holes)


@dataclass(frozen=True, eq=True)
class MultiPolygon(Geometry):
    polygons: tuple[Polygon, ...] = ()
    geom_type = "MultiPolygon"

    def __post_init__(self):
        polys = tuple(p if isinstance(p, Polygon) else Polygon(*p) for p in self.polygons)
        if any(p.is_empty for p in polys):
            raise GeometryError("MultiPolygon members must be non-empty")
        object.__setattr__(self, "polygons", polys)

    @property
    def is_empty(self) -> bool:
        return not self.polygons

    def coords(self) -> Iterator[Coord]:
        for p in self.polygons:
            yield from p.coords()


AnyGeometry = Union[Point, MultiPoint, LineString, MultiLineString, Polygon, MultiPolygon]


def _shoelace(ring: Sequence[Coord]) -> float:
    return 0.5 * sum(p[0] * q[1] - q[0] * p[1] for p, q in zip(ring, ring[1:]))


def dimension(g: Geometry) -> Optional[int]:
    """Topological dimension: None for an empty geometry, else 0, 1 or 2."""
    if g.is_empty:
        return None
    if isinstance(g, (Polygon, MultiPolygon)):
        return 2
    if isinstance(g, (LineString, MultiLineString)):
        return 1
    return 0


def geometry_type(g: Geometry) -> str:
    return g.geom_type


def base_type(type_name: str) -> str:
    """Collapse a Multi* type name onto its single-part counterpart."""
    return type_name[5:] if type_name.startswith("Multi") else type_name


def components(g: Geometry) -> list[Geometry]:
    if isinstance(g, MultiPoint):
        return [Point(*c) for c in g.points]
    if isinstance(g, MultiLineString):
        return list(g.lines)
    if isinstance(g, MultiPolygon):
        return list(g.polygons)
    return [] if g.is_empty else [g]


def translate(g: Geometry, dx: float, dy: float) -> Geometry:
    return transform(g, lambda c: (c[0] + dx, c[1] + dy))


def transform(g: Geometry, fn) -> Geometry:
    """Apply ``fn((x, y)) -> (x, y)`` to every coordinate."""
    if isinstance(g, Point):
        return g if g.is_empty else Point(*fn((g.x, g.y)))
    if isinstance(g, MultiPoint):
        return MultiPoint(tuple(fn(c) for c in g.points))
    if isinstance(g, LineString):
        return LineString(tuple(fn(c) for c in g.points))
    if isinstance(g, MultiLineString):
        return MultiLineString(tuple(transform(l, fn) for l in g.lines))
    if isinstance(g, Polygon):
        if g.is_empty:
            return g
        return Polygon(tuple(fn(c) for c in g.shell), tuple(tuple(fn(c) for c in h) for h in g.holes))
    if isinstance(g, MultiPolygon):
        return MultiPolygon(tuple(transform(p, fn) for p in g.polygons))
    raise TypeError(f"not a geometry: {g!r}")


# -- validation --------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    rule: str
    detail: str
    part: Optional[int] = None
    ring: Optional[int] = None
    segment: Optional[int] = None

    def __str__(self) -> str:
        where = ", ".join(
            f"{k} {v}" for k, v in (("part", self.part), ("ring", self.ring), ("segment", self.segment))
            if v is not None
        )
        return f"{self.rule}: {self.detail}" + (f" ({where})" if where else "")


def validate(g: Geometry) -> list[Violation]:
    """Violations of the simple-feature invariants; empty iff ``g`` is valid."""
    return list(g.violations)


def _validate(g: Geometry) -> list[Violation]:
    out: list[Violation] = []
    for x, y in g.coords():
        if not (math.isfinite(x) and math.isfinite(y)):
            return [Violation("NonFiniteCoordinate", f"({x}, {y}) is not finite")]
    if g.is_empty:
        return out
    if isinstance(g, LineString):
        _check_line(g, None, out)
    elif isinstance(g, MultiLineString):
        for i, line in enumerate(g.lines):
            _check_line(line, i, out)
    elif isinstance(g, Polygon):
        _check_polygon(g, None, out)
    elif isinstance(g, MultiPolygon):
        for i, poly in enumerate(g.polygons):
            _check_polygon(poly, i, out)
        if not out:
            _check_multipolygon_overlap(g, out)
    return out


def _check_line(line: LineString, part: Optional[int], out: list[Violation]) -> None:
    if all(p == line.points[0] for p in line.points):
        out.append(Violation("ZeroLengthLine", "all coordinates coincide", part=part))


def _check_polygon(poly: Polygon, part: Optional[int], out: list[Violation]) -> None:
    scale = _exact.Scale(v for c in poly.coords() for v in c)
    rings = [_exact.dedupe_consecutive([scale.point(c) for c in r]) for r in poly.rings]
    simple = True
    for i, ring in enumerate(rings):
        seg = _ring_self_intersection(ring) if len(ring) >= 4 else None
        if seg is not None:
            # checked first: a symmetric bow-tie also has zero signed area
            out.append(
                Violation("RingSelfIntersection", "ring is not simple", part=part, ring=i, segment=seg)
            )
            simple = False
        elif len(ring) < 4 or _exact.signed_area2(ring) == 0:
            out.append(Violation("DegenerateRing", "ring has zero area", part=part, ring=i))
            simple = False
    if not simple:
        return
    shell = rings[0]
    for i, hole in enumerate(rings[1:], start=1):
        if _hole_outside(hole, shell):
            out.append(Violation("HoleOutsideShell", "hole is not inside the shell", part=part, ring=i))


def _ring_self_intersection(ring: list) -> Optional[int]:
    n = len(ring) - 1
    for i in range(n):
        a1, a2 = ring[i], ring[i + 1]
        for j in range(i + 1, n):
            b1, b2 = ring[j], ring[j + 1]
            pts = _exact.intersect(a1, a2, b1, b2)
            if not pts:
                continue
            adjacent = j == i + 1 or (i == 0 and j == n - 1)
            if not adjacent or len(pts) > 1:
                return i
            shared = a2 if j == i + 1 else a1
            if not _exact.same(pts[0], shared):
                return i
    return None


def _hole_outside(hole: list, shell: list) -> bool:
    if any(_exact.ring_location(p, shell) < 0 for p in hole[:-1]):
        return True
    # split each hole edge where it meets the shell; every piece must stay inside
    for a1, a2 in zip(hole, hole[1:]):
        cuts = [a1, a2]
        for b1, b2 in zip(shell, shell[1:]):
            cuts.extend(_exact.intersect(a1, a2, b1, b2))
        cuts.sort(key=_exact.param_key(a1, a2))
        for p, q in zip(cuts, cuts[1:]):
            if not _exact.same(p, q) and _exact.ring_location(_exact.midpoint(p, q), shell) < 0:
                return True
    return False


def _check_multipolygon_overlap(g: MultiPolygon, out: list[Violation]) -> None:
    from .topology import relate

    polys = g.polygons
    for i in range(len(polys)):
        for j in range(i + 1, len(polys)):
            if relate(polys[i], polys[j], check=False)[0] != "F":
                out.append(Violation("OverlappingPolygons", f"interiors of parts {i} and {j} meet", part=i))
