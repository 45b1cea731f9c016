"""Well-known-text reading and writing, plus a GeoJSON geometry reader."""
from __future__ import annotations

import math
import re
from decimal import Decimal
from typing import Any, Optional

from .geometry import (
    Coord,
    Geometry,
    GeometryError,
    LineString,
    MultiLineString,
    MultiPoint,
    MultiPolygon,
    Point,
    Polygon,
)

__all__ = ["ParseError", "parse_wkt", "to_wkt", "find_wkt", "from_geojson", "to_geojson", "round_geometry"]


class ParseError(ValueError):
    """Malformed WKT.  ``offset`` is the character index of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.message = message
        self.offset = offset


_TOKEN = re.compile(
    r"\s*(?:(?P<num>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<word>[A-Za-z]+)|(?P<punct>[(),]))"
)

_KEYWORDS = ("POINT", "LINESTRING", "POLYGON", "MULTIPOINT", "MULTILINESTRING", "MULTIPOLYGON")


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> tuple[str, str, int]:
        self._skip()
        if self.pos >= len(self.text):
            return ("eof", "", self.pos)
        m = _TOKEN.match(self.text, self.pos)
        if not m:
            return ("bad", self.text[self.pos], self.pos)
        kind = m.lastgroup
        return (kind, m.group(kind), m.start(kind))

    def next(self) -> tuple[str, str, int]:
        tok = self.peek()
        if tok[0] not in ("eof", "bad"):
            self.pos = tok[2] + len(tok[1])
        return tok

    def expect(self, punct: str) -> None:
        kind, val, off = self.next()
        if kind != "punct" or val != punct:
            raise ParseError(f"expected {punct!r}, found {_describe(kind, val)}", off)

    def number(self) -> float:
        kind, val, off = self.next()
        if kind != "num":
            raise ParseError(f"expected a number, found {_describe(kind, val)}", off)
        v = float(val)
        if not math.isfinite(v):
            raise ParseError(f"coordinate {val!r} overflows", off)
        return v

    def coord(self) -> Coord:
        x = self.number()
        y = self.number()
        kind, val, off = self.peek()
        if kind == "num":
            raise ParseError("Z/M coordinates are not supported", off)
        return (x, y)

    def empty_or_open(self) -> bool:
        """Consume EMPTY (-> True) or an opening parenthesis (-> False)."""
        kind, val, off = self.next()
        if kind == "word" and val.upper() == "EMPTY":
            return True
        if kind == "punct" and val == "(":
            return False
        if kind == "word" and val.upper() in ("Z", "M", "ZM"):
            raise ParseError("Z/M coordinates are not supported", off)
        raise ParseError(f"expected '(' or EMPTY, found {_describe(kind, val)}", off)

    def coord_list(self, open_done: bool = False) -> tuple[list[Coord], int]:
        start = self.peek()[2]
        if not open_done:
            self.expect("(")
        coords = [self.coord()]
        while self._comma():
            coords.append(self.coord())
        self.expect(")")
        return coords, start

    def _comma(self) -> bool:
        kind, val, _ = self.peek()
        if kind == "punct" and val == ",":
            self.next()
            return True
        return False


def _describe(kind: str, val: str) -> str:
    return "end of input" if kind == "eof" else repr(val)


def _line(coords: list[Coord], off: int) -> LineString:
    if len(coords) < 2:
        raise ParseError(f"LineString needs at least 2 coordinates, got {len(coords)}", off)
    return LineString(tuple(coords))


def _rings(r: _Reader) -> tuple[list, int]:
    start = r.peek()[2]
    rings = []
    while True:
        coords, off = r.coord_list()
        if len(coords) < 4:
            raise ParseError(f"ring needs at least 4 coordinates, got {len(coords)}", off)
        if coords[0] != coords[-1]:
            raise ParseError("ring is not closed", off)
        rings.append(tuple(coords))
        if not r._comma():
            break
    r.expect(")")
    return rings, start


def parse_wkt(text: str) -> Geometry:
    """Parse a 2D WKT geometry.  Keywords are case-insensitive and both
    ``POINT(1 2)`` and ``POINT (1 2)`` are accepted."""
    r = _Reader(text)
    kind, val, off = r.next()
    if kind != "word":
        raise ParseError(f"expected a geometry keyword, found {_describe(kind, val)}", off)
    key = val.upper()
    if key not in _KEYWORDS:
        raise ParseError(f"unknown geometry keyword {val!r}", off)
    g = _PARSERS[key](r)
    kind, val, off = r.peek()
    if kind != "eof":
        raise ParseError(f"unexpected trailing {_describe(kind, val)}", off)
    return g


def _p_point(r: _Reader) -> Geometry:
    if r.empty_or_open():
        return Point()
    c = r.coord()
    r.expect(")")
    return Point(*c)


def _p_linestring(r: _Reader) -> Geometry:
    start = r.peek()[2]
    if r.empty_or_open():
        return LineString()
    coords, _ = r.coord_list(open_done=True)
    return _line(coords, start)


def _p_polygon(r: _Reader) -> Geometry:
    if r.empty_or_open():
        return Polygon()
    rings, _ = _rings(r)
    return Polygon(rings[0], tuple(rings[1:]))


def _p_multipoint(r: _Reader) -> Geometry:
    if r.empty_or_open():
        return MultiPoint()
    pts = []
    while True:
        kind, val, _ = r.peek()
        if kind == "punct" and val == "(":
            r.next()
            pts.append(r.coord())
            r.expect(")")
        else:
            pts.append(r.coord())
        if not r._comma():
            break
    r.expect(")")
    return MultiPoint(tuple(pts))


def _p_multilinestring(r: _Reader) -> Geometry:
    if r.empty_or_open():
        return MultiLineString()
    lines = []
    while True:
        coords, off = r.coord_list()
        lines.append(_line(coords, off))
        if not r._comma():
            break
    r.expect(")")
    return MultiLineString(tuple(lines))


def _p_multipolygon(r: _Reader) -> Geometry:
    if r.empty_or_open():
        return MultiPolygon()
    polys = []
    while True:
        r.expect("(")
        rings, _ = _rings(r)
        polys.append(Polygon(rings[0], tuple(rings[1:])))
        if not r._comma():
            break
    r.expect(")")
    return MultiPolygon(tuple(polys))


_PARSERS = {
    "POINT": _p_point,
    "LINESTRING": _p_linestring,
    "POLYGON": _p_polygon,
    "MULTIPOINT": _p_multipoint,
    "MULTILINESTRING": _p_multilinestring,
    "MULTIPOLYGON": _p_multipolygon,
}

_FIND = re.compile(r"\b(MULTIPOLYGON|MULTILINESTRING|MULTIPOINT|POLYGON|LINESTRING|POINT)\b\s*(\(|EMPTY\b)", re.I)


def find_wkt(text: str) -> Optional[str]:
    """Extract the first balanced WKT expression embedded in free text."""
    for m in _FIND.finditer(text):
        if m.group(2).upper() == "EMPTY":
            return text[m.start() : m.end()]
        depth = 0
        for i in range(m.start(2), len(text)):
            ch = text[i]
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                if depth == 0:
                    return text[m.start() : i + 1]
        return text[m.start() :]
    return None


# -- writing -------------------------------------------------------------------


def _num(v: float, precision: Optional[int]) -> str:
    if precision is None:
        s = format(Decimal(repr(v)), "f")
    else:
        s = f"{v:.{precision}f}"
    if "." in s:
        s = s.rstrip("0").rstrip(".")
    if s in ("-0", ""):
        s = "0"
    return s


def _seq(coords, precision) -> str:
    return "(" + ", ".join(f"{_num(x, precision)} {_num(y, precision)}" for x, y in coords) + ")"


def to_wkt(g: Geometry, precision: Optional[int] = 6) -> str:
    """Canonical WKT: uppercase keyword, single spaces, ``precision`` decimal
    places with trailing zeros trimmed.  ``precision=None`` writes the
    shortest representation that round-trips exactly."""
    key = g.geom_type.upper()
    if g.is_empty:
        return f"{key} EMPTY"
    if isinstance(g, Point):
        return f"POINT ({_num(g.x, precision)} {_num(g.y, precision)})"
    if isinstance(g, MultiPoint):
        return "MULTIPOINT (" + ", ".join(_seq([c], precision) for c in g.points) + ")"
    if isinstance(g, LineString):
        return "LINESTRING " + _seq(g.points, precision)
    if isinstance(g, MultiLineString):
        return "MULTILINESTRING (" + ", ".join(_seq(l.points, precision) for l in g.lines) + ")"
    if isinstance(g, Polygon):
        return "POLYGON " + _poly_body(g, precision)
    if isinstance(g, MultiPolygon):
        return "MULTIPOLYGON (" + ", ".join(_poly_body(p, precision) for p in g.polygons) + ")"
    raise TypeError(f"not a geometry: {g!r}")


def _poly_body(p: Polygon, precision) -> str:
    return "(" + ", ".join(_seq(r, precision) for r in p.rings) + ")"


def round_geometry(g: Geometry, precision: int) -> Geometry:
    """``g`` with every coordinate rounded the way ``to_wkt`` rounds it."""
    from .geometry import transform

    return transform(g, lambda c: (float(f"{c[0]:.{precision}f}"), float(f"{c[1]:.{precision}f}")))


# -- GeoJSON -------------------------------------------------------------------


def from_geojson(obj: dict[str, Any]) -> Geometry:
    """Read a GeoJSON geometry object (2D positions only)."""
    if obj.get("type") == "Feature":
        obj = obj["geometry"]
    kind = obj.get("type")
    c = obj.get("coordinates")
    try:
        if kind == "Point":
            return Point() if not c else Point(*_pos(c))
        if kind == "MultiPoint":
            return MultiPoint(tuple(_pos(p) for p in c))
        if kind == "LineString":
            return LineString(tuple(_pos(p) for p in c))
        if kind == "MultiLineString":
            return MultiLineString(tuple(LineString(tuple(_pos(p) for p in l)) for l in c))
        if kind == "Polygon":
            return _gj_polygon(c)
        if kind == "MultiPolygon":
            return MultiPolygon(tuple(_gj_polygon(p) for p in c))
    except (TypeError, IndexError) as exc:
        raise GeometryError(f"malformed GeoJSON {kind} coordinates: {exc}") from exc
    raise GeometryError(f"unsupported GeoJSON geometry type {kind!r}")


def _pos(p) -> Coord:
    if len(p) != 2:
        raise GeometryError("only 2D GeoJSON positions are supported")
    x, y = float(p[0]), float(p[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise GeometryError("non-finite coordinate")
    return (x, y)


def _gj_polygon(rings) -> Polygon:
    if not rings:
        return Polygon()
    rr = [tuple(_pos(p) for p in r) for r in rings]
    return Polygon(rr[0], tuple(rr[1:]))


def to_geojson(g: Geometry) -> dict[str, Any]:
    if isinstance(g, Point):
        return {"type": "Point", "coordinates": [] if g.is_empty else [g.x, g.y]}
    if isinstance(g, MultiPoint):
        return {"type": "MultiPoint", "coordinates": [list(c) for c in g.points]}
    if isinstance(g, LineString):
        return {"type": "LineString", "coordinates": [list(c) for c in g.points]}
    if isinstance(g, MultiLineString):
        return {"type": "MultiLineString", "coordinates": [[list(c) for c in l.points] for l in g.lines]}
    if isinstance(g, Polygon):
        return {"type": "Polygon", "coordinates": [[list(c) for c in r] for r in g.rings]}
    if isinstance(g, MultiPolygon):
        return {
            "type": "MultiPolygon",
            "coordinates": [[[list(c) for c in r] for r in p.rings] for p in g.polygons],
        }
    raise TypeError(f"not a geometry: {g!r}")
