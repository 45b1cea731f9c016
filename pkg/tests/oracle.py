"""Independent DE-9IM oracle for tests.

Works in exact rationals and shares no code with the package.  The plane
is cut into an arrangement by every segment of both geometries; every
arrangement vertex (dimension 0), every sub-segment midpoint (dimension 1)
and one sample per face, found by scanning vertical slabs (dimension 2),
is located against each geometry.  A matrix entry is the largest
dimension among samples whose locations fall in that cell.

Input is plain coordinates::

    ("Point", [(x, y), ...])            # one or more points
    ("LineString", [[(x, y), ...], ...])  # one or more lines
    ("Polygon", [[shell, hole, ...], ...])  # one or more polygons
"""
from __future__ import annotations

from fractions import Fraction as F
from itertools import combinations

INTERIOR, BOUNDARY, EXTERIOR = 0, 1, 2


def _fr(p):
    return (F(str(p[0])), F(str(p[1])))


def normalize(kind, parts):
    """Coordinates to Fractions; one level of nesting per the docstring."""
    if kind == "Point":
        return kind, [_fr(p) for p in parts]
    if kind == "LineString":
        return kind, [[_fr(p) for p in line] for line in parts]
    return kind, [[[_fr(p) for p in ring] for ring in poly] for poly in parts]


def from_geometry(g):
    """Adapter from a package geometry (only its public fields are read)."""
    t = g.geom_type
    if t == "Point":
        return normalize("Point", [(g.x, g.y)])
    if t == "MultiPoint":
        return normalize("Point", list(g.points))
    if t == "LineString":
        return normalize("LineString", [list(g.points)])
    if t == "MultiLineString":
        return normalize("LineString", [list(l.points) for l in g.lines])
    if t == "Polygon":
        return normalize("Polygon", [[list(g.shell), *map(list, g.holes)]])
    return normalize("Polygon", [[list(p.shell), *map(list, p.holes)] for p in g.polygons])


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _on_segment(p, a, b):
    if _cross(a, b, p) != 0:
        return False
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])


def _segments(kind, parts):
    if kind == "Point":
        return []
    if kind == "LineString":
        return [(l[i], l[i + 1]) for l in parts for i in range(len(l) - 1) if l[i] != l[i + 1]]
    return [(r[i], r[i + 1]) for poly in parts for r in poly for i in range(len(r) - 1) if r[i] != r[i + 1]]


def _ring_contains(ring, p):
    """Strict even-odd test; the caller has already excluded the boundary."""
    inside = False
    for a, b in zip(ring, ring[1:]):
        if (a[1] > p[1]) != (b[1] > p[1]):
            x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
            if x > p[0]:
                inside = not inside
    return inside


def locate(geom, p):
    kind, parts = geom
    if kind == "Point":
        return INTERIOR if p in parts else EXTERIOR
    if kind == "LineString":
        ends = {}
        for l in parts:
            if l[0] != l[-1]:
                for e in (l[0], l[-1]):
                    ends[e] = ends.get(e, 0) + 1
        # mod-2 boundary rule
        if ends.get(p, 0) % 2 == 1:
            return BOUNDARY
        if any(_on_segment(p, a, b) for a, b in _segments(kind, parts)):
            return INTERIOR
        return EXTERIOR
    if any(_on_segment(p, a, b) for a, b in _segments(kind, parts)):
        return BOUNDARY
    for poly in parts:
        if _ring_contains(poly[0], p) and not any(_ring_contains(h, p) for h in poly[1:]):
            return INTERIOR
    return EXTERIOR


def _intersections(s, t):
    (a, b), (c, d) = s, t
    r = (b[0] - a[0], b[1] - a[1])
    q = (d[0] - c[0], d[1] - c[1])
    den = r[0] * q[1] - r[1] * q[0]
    if den == 0:
        return [p for p in (a, b, c, d) if _on_segment(p, a, b) and _on_segment(p, c, d)]
    u = ((c[0] - a[0]) * q[1] - (c[1] - a[1]) * q[0]) / den
    v = ((c[0] - a[0]) * r[1] - (c[1] - a[1]) * r[0]) / den
    if 0 <= u <= 1 and 0 <= v <= 1:
        return [(a[0] + u * r[0], a[1] + u * r[1])]
    return []


def samples(ga, gb):
    """(point, dimension) samples covering every cell of the arrangement."""
    segs = _segments(*ga) + _segments(*gb)
    verts = set()
    for kind, parts in (ga, gb):
        if kind == "Point":
            verts.update(parts)
    for s in segs:
        verts.update(s)
    for s, t in combinations(segs, 2):
        verts.update(_intersections(s, t))
    out = [(v, 0) for v in verts]
    for a, b in segs:
        on = sorted({v for v in verts if _on_segment(v, a, b)})
        out.extend((((p[0] + q[0]) / 2, (p[1] + q[1]) / 2), 1) for p, q in zip(on, on[1:]))
    xs = sorted({v[0] for v in verts})
    if not xs:
        return out
    # one sample left and right of everything, then one per slab face
    mids = [xs[0] - 1, xs[-1] + 1] + [(x0 + x1) / 2 for x0, x1 in zip(xs, xs[1:])]
    for x in mids:
        ys = set()
        for a, b in segs:
            if a[0] != b[0] and min(a[0], b[0]) < x < max(a[0], b[0]):
                ys.add(a[1] + (x - a[0]) * (b[1] - a[1]) / (b[0] - a[0]))
        ys = sorted(ys)
        if not ys:
            out.append(((x, F(0)), 2))
            continue
        out.append(((x, ys[0] - 1), 2))
        out.append(((x, ys[-1] + 1), 2))
        out.extend(((x, (y0 + y1) / 2), 2) for y0, y1 in zip(ys, ys[1:]))
    return out


def matrix(ga, gb) -> str:
    """Row-major DE-9IM code of two normalized geometries."""
    m = [-1] * 9
    for p, d in samples(ga, gb):
        i = 3 * locate(ga, p) + locate(gb, p)
        m[i] = max(m[i], d)
    return "".join("F" if v < 0 else str(v) for v in m)


def dim(geom):
    return {"Point": 0, "LineString": 1, "Polygon": 2}[geom[0]]


def _t(c):
    return c != "F"


def predicate(code, da, db):
    """Named predicate in the fixed order equals, within, contains, crosses,
    overlaps, touches, disjoint (OGC definitions)."""
    II, IB, IE, BI, BB, BE, EI, EB, EE = code
    if _t(II) and IE == "F" and BE == "F" and EI == "F" and EB == "F":
        return "equals"
    if _t(II) and IE == "F" and BE == "F":
        return "within"
    if _t(II) and EI == "F" and EB == "F":
        return "contains"
    if da < db and _t(II) and _t(IE):
        return "crosses"
    if da > db and _t(II) and _t(EI):
        return "crosses"
    if da == db == 1 and II == "0":
        return "crosses"
    if da == db and da != 1 and _t(II) and _t(IE) and _t(EI):
        return "overlaps"
    if da == db == 1 and II == "1" and _t(IE) and _t(EI):
        return "overlaps"
    if II == "F" and not (da == db == 0) and (_t(IB) or _t(BI) or _t(BB)):
        return "touches"
    if II == "F" and IB == "F" and BI == "F" and BB == "F":
        return "disjoint"
    return "undetermined"
