"""Synthetic lon/lat corpora for offline dataset builds.

Each grid cell holds a small motif of polygons, lines and points whose
pairwise relations cover every non-equals (type, predicate, type)
combination.  Cells are randomly rotated, mirrored and scaled so no two
cells share a shape, and all coordinates are four-decimal degrees.
"""
from __future__ import annotations

import math
import random
from typing import Optional

from .dataset import Corpus, SpatialEntity
from .geometry import LineString, Point, Polygon


def _box(x0, y0, x1, y1):
    return [(x0, y0), (x1, y0), (x1, y1), (x0, y1), (x0, y0)]


# (key, kind, local integer coordinates)
_MOTIF = [
    ("A1", "Polygon", _box(0, 0, 6, 6)),
    ("A2", "Polygon", _box(6, 0, 12, 6)),
    ("A3", "Polygon", _box(3, 3, 9, 9)),
    ("A4", "Polygon", _box(1, 1, 2, 2)),
    ("L1", "LineString", [(1, 4), (2, 5)]),
    ("L2", "LineString", [(-2, 3), (2, 3)]),
    ("L3", "LineString", [(12, 2), (14, 2)]),
    ("P1", "Point", [(5, 1)]),
    ("P2", "Point", [(0, 3)]),
    ("P3", "Point", [(14, 2)]),
    ("P4", "Point", [(13, 2)]),
    ("P5", "Point", [(14, 5)]),
    ("L4", "LineString", [(0, 24), (8, 24)]),
    ("L5", "LineString", [(4, 22), (4, 26)]),
    ("L6", "LineString", [(6, 24), (10, 24)]),
    ("L7", "LineString", [(1, 24), (3, 24)]),
    ("L8", "LineString", [(8, 24), (8, 27)]),
    ("L9", "LineString", [(10, 26), (12, 28)]),
    ("P6", "Point", [(2, 24)]),
    ("P7", "Point", [(0, 24)]),
    ("P8", "Point", [(5, 26)]),
]

_PLACE = {"Polygon": "city", "LineString": "highway", "Point": "poi"}


def synthetic_corpus(
    cells: int = 240,
    seed: int = 0,
    origin: tuple[float, float] = (-89.5, 43.0),
    unit: float = 1e-4,
    spacing: int = 80,
) -> Corpus:
    """A corpus of ``cells`` independently transformed motif copies."""
    rng = random.Random(seed)
    cols = max(1, math.ceil(math.sqrt(cells)))
    corpus: Corpus = {}
    for n in range(cells):
        rot = rng.randrange(4)
        mirror = rng.random() < 0.5
        scale = rng.choice((1, 2))
        cx, cy = (n % cols) * spacing + 20, (n // cols) * spacing + 20

        def place(p, rot=rot, mirror=mirror, scale=scale, cx=cx, cy=cy):
            x, y = p
            if mirror:
                x = -x
            for _ in range(rot):
                x, y = -y, x
            return (round(origin[0] + (cx + scale * x) * unit, 4), round(origin[1] + (cy + scale * y) * unit, 4))

        for key, kind, pts in _MOTIF:
            coords = [place(p) for p in pts]
            if kind == "Point":
                g = Point(*coords[0])
            elif kind == "LineString":
                g = LineString(coords)
            else:
                g = Polygon(coords)
            eid = f"c{n:04d}-{key}"
            corpus[eid] = SpatialEntity(eid, g, eid, _PLACE[kind], "synthetic")
    return corpus


def random_geometry(rng: random.Random, kind: Optional[str] = None, span: int = 10):
    """A small valid integer geometry for property tests and benchmarks."""
    kind = kind or rng.choice(("Point", "LineString", "Polygon"))
    if kind == "Point":
        return Point(rng.randint(0, span), rng.randint(0, span))
    if kind == "LineString":
        pts = [(rng.randint(0, span), rng.randint(0, span))]
        for _ in range(rng.randint(1, 3)):
            q = (rng.randint(0, span), rng.randint(0, span))
            if q != pts[-1]:
                pts.append(q)
        if len(pts) < 2:
            pts.append((pts[0][0] + 1, pts[0][1]))
        return LineString(pts)
    x0, y0 = rng.randint(0, span - 1), rng.randint(0, span - 1)
    x1, y1 = rng.randint(x0 + 1, span), rng.randint(y0 + 1, span)
    if rng.random() < 0.5:
        return Polygon(_box(x0, y0, x1, y1))
    return Polygon([(x0, y0), (x1, y0), (x0, y1), (x0, y0)])
