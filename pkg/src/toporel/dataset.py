"""Spatial entity corpora, ground-truth triplet sampling and vernacular
conversion pairs."""
from __future__ import annotations

import csv
import json
import math
import os
import random
import re
import tempfile
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Iterator, Mapping, Optional, Sequence, Union

import numpy as np

from ._exact import decimal_parts
from .geometry import (
    SIMPLE_TYPES,
    Geometry,
    GeometryError,
    LineString,
    Point,
    Polygon,
    Violation,
    components,
    validate,
)
from .topology import (
    PREDICATES,
    Predicate,
    Undetermined,
    all_combinations,
    classify,
    inverse,
    is_valid_combination,
)
from .wkt import ParseError, from_geojson, parse_wkt, to_wkt

SPLITS = ("train", "eval", "fewshot")
SPLIT_SIZES = {"train": 160, "eval": 40, "fewshot": 25}
JOIN_PREDICATES = (
    Predicate.WITHIN,
    Predicate.CONTAINS,
    Predicate.OVERLAPS,
    Predicate.TOUCHES,
    Predicate.CROSSES,
)

Combo = tuple[str, Predicate, str]


class DatasetError(ValueError):
    """Base class of dataset construction errors."""


class UnsupportedType(DatasetError):
    pass


class NoCandidate(DatasetError):
    pass


class CountError(DatasetError):
    pass


class ShortfallError(DatasetError):
    """Raised when some combinations cannot be filled; carries the partial
    sample so callers can inspect or persist it."""

    def __init__(self, shortfall: Mapping[Combo, int], sample: "TripletSample"):
        self.shortfall = dict(shortfall)
        self.sample = sample
        rows = ", ".join(f"{a}/{p.value}/{b}: {n}" for (a, p, b), n in self.shortfall.items())
        super().__init__(f"under-filled combinations (have): {rows}")


class VerificationError(DatasetError):
    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__(f"{len(self.problems)} triplet(s) failed verification: " + "; ".join(self.problems[:5]))


# --------------------------------------------------------------------------
# entities and corpora


@dataclass(frozen=True)
class SpatialEntity:
    id: str
    geometry: Geometry
    name: Optional[str] = None
    place_type: Optional[str] = None
    source: str = ""

    @property
    def geom_type(self) -> str:
        return self.geometry.geom_type

    def to_dict(self, precision: Optional[int] = None) -> dict:
        return {
            "id": self.id,
            "wkt": to_wkt(self.geometry, precision),
            "name": self.name,
            "place_type": self.place_type,
            "source": self.source,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "SpatialEntity":
        if "wkt" in d:
            g = parse_wkt(d["wkt"])
        elif "geometry" in d:
            g = from_geojson(d["geometry"])
        else:
            raise ParseError("entity has neither 'wkt' nor 'geometry'", 0)
        return cls(str(d["id"]), g, d.get("name") or None, d.get("place_type") or None, d.get("source") or "")


Corpus = dict[str, SpatialEntity]


@dataclass
class IngestReport:
    accepted: int = 0
    rejected: list[tuple[str, str]] = field(default_factory=list)

    @property
    def counts(self) -> dict[str, int]:
        reasons = Counter(r.split(":", 1)[0] for _, r in self.rejected)
        return {"accepted": self.accepted, "rejected": len(self.rejected), **dict(sorted(reasons.items()))}


def _admit(corpus: Corpus, report: IngestReport, ent: SpatialEntity) -> None:
    if ent.geometry.is_empty:
        report.rejected.append((ent.id, "EmptyGeometry: geometry is empty"))
        return
    problems = validate(ent.geometry)
    if problems:
        report.rejected.append((ent.id, f"{problems[0].rule}: {problems[0].detail}"))
        return
    if ent.id in corpus:
        report.rejected.append((ent.id, "DuplicateId: id already present"))
        return
    corpus[ent.id] = ent
    report.accepted += 1


def _rows(path: Path, fmt: str, source: str) -> Iterator[tuple[str, Union[SpatialEntity, Exception]]]:
    if fmt == "wkt-csv":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            for n, row in enumerate(reader, start=2):
                rid = (row.get("id") or f"row{n}").strip()
                try:
                    g = parse_wkt(row.get("wkt") or "")
                    yield rid, SpatialEntity(rid, g, (row.get("name") or None), (row.get("place_type") or None), source)
                except (ParseError, GeometryError) as exc:
                    yield rid, exc
    elif fmt == "jsonl":
        with open(path, encoding="utf-8") as fh:
            for n, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                rid = f"line{n}"
                try:
                    d = json.loads(line)
                    rid = str(d.get("id", rid))
                    ent = SpatialEntity.from_dict({**d, "id": rid})
                    yield rid, replace(ent, source=ent.source or source)
                except (ValueError, KeyError, TypeError, GeometryError) as exc:
                    yield rid, exc
    elif fmt == "geojson":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        feats = doc["features"] if doc.get("type") == "FeatureCollection" else [doc]
        for n, f in enumerate(feats):
            props = f.get("properties") or {}
            rid = str(f.get("id", props.get("id", f"feature{n}")))
            try:
                g = from_geojson(f)
                yield rid, SpatialEntity(rid, g, props.get("name"), props.get("place_type"), source)
            except (ValueError, KeyError, TypeError, GeometryError) as exc:
                yield rid, exc
    else:
        raise ValueError(f"unknown ingest format {fmt!r}")


def ingest(path: Union[str, Path], fmt: str = "wkt-csv", report: Optional[IngestReport] = None) -> Corpus:
    """Read entities from a file, keeping only valid, non-empty geometries.

    Row-level problems are recorded in ``report`` and never abort the read.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    report = report if report is not None else IngestReport()
    corpus: Corpus = {}
    for rid, item in _rows(path, fmt, path.stem):
        if isinstance(item, Exception):
            report.rejected.append((rid, f"{type(item).__name__}: {item}"))
        else:
            _admit(corpus, report, item)
    return corpus


def write_entities(path: Union[str, Path], entities: Iterable[SpatialEntity]) -> None:
    """Entities as JSONL, sorted by id, coordinates written exactly."""
    lines = [json.dumps(e.to_dict(None), sort_keys=True) for e in sorted(entities, key=lambda e: e.id)]
    _atomic_write(path, "".join(l + "\n" for l in lines))


def read_entities(path: Union[str, Path]) -> Corpus:
    return ingest(path, "jsonl")


def _atomic_write(path: Union[str, Path], text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


# --------------------------------------------------------------------------
# spatial index and distances


class SpatialIndex:
    """Bounding-box filter over a fixed list of entities."""

    def __init__(self, entities: Sequence[SpatialEntity]):
        self.entities = list(entities)
        if self.entities:
            self.boxes = np.array([e.geometry.bounds for e in self.entities], dtype=float)
        else:
            self.boxes = np.zeros((0, 4))

    def query(self, box: Sequence[float], expand: float = 0.0) -> np.ndarray:
        x0, y0, x1, y1 = box
        b = self.boxes
        hit = (b[:, 0] <= x1 + expand) & (b[:, 2] >= x0 - expand) & (b[:, 1] <= y1 + expand) & (b[:, 3] >= y0 - expand)
        return np.flatnonzero(hit)


def _seg_dist(p, a, b) -> float:
    (px, py), (ax, ay), (bx, by) = p, a, b
    dx, dy = bx - ax, by - ay
    L = dx * dx + dy * dy
    t = 0.0 if L == 0 else max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / L))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def _parts(g: Geometry) -> tuple[list, list]:
    pts, segs = [], []
    for c in components(g):
        if isinstance(c, Point):
            pts.append((c.x, c.y))
        elif isinstance(c, LineString):
            segs.extend(zip(c.points, c.points[1:]))
        else:
            for ring in (c.shell, *c.holes):
                segs.extend(zip(ring, ring[1:]))
    return pts, segs


def _segments_cross(s, t) -> bool:
    def o(p, q, r):
        v = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
        return (v > 0) - (v < 0)

    return o(*s, t[0]) * o(*s, t[1]) <= 0 and o(*t, s[0]) * o(*t, s[1]) <= 0


def boundary_distance(a: Geometry, b: Geometry) -> float:
    """Float distance between the point/edge skeletons of two geometries.

    Equal to the true distance whenever the geometries are disjoint, which
    is the only case the samplers use it for."""
    pa, sa = _parts(a)
    pb, sb = _parts(b)
    best = math.inf
    for p in pa:
        for q in pb:
            best = min(best, math.hypot(p[0] - q[0], p[1] - q[1]))
        for s in sb:
            best = min(best, _seg_dist(p, *s))
    for q in pb:
        for s in sa:
            best = min(best, _seg_dist(q, *s))
    for s in sa:
        for t in sb:
            if _segments_cross(s, t):
                return 0.0
            best = min(best, _seg_dist(s[0], *t), _seg_dist(s[1], *t), _seg_dist(t[0], *s), _seg_dist(t[1], *s))
    return best


# --------------------------------------------------------------------------
# equals synthesis


def _max_decimals(g: Geometry) -> int:
    return max((max(0, -decimal_parts(v)[1]) for c in g.coords() for v in c), default=0)


def _fits(v: Fraction, precision: int) -> bool:
    d = v.denominator
    for f in (2, 5):
        n = 0
        while d % f == 0:
            d //= f
            n += 1
        if n > precision:
            return False
    return d == 1


def _split_params(a, b, precision: int) -> list[Fraction]:
    """Parameters t in (0, 1) at which a + t (b - a) keeps ``precision``
    decimals in both coordinates."""
    ax, ay, bx, by = (Fraction(repr(v)) for v in (*a, *b))
    if (ax, ay) == (bx, by):
        return []
    unit = Fraction(1, 10**precision)
    steps = [abs(bx - ax) / unit, abs(by - ay) / unit]
    if any(s.denominator != 1 for s in steps):
        return []
    g = math.gcd(int(steps[0]), int(steps[1]))
    return [Fraction(k, g) for k in range(1, g)]


def _densify(points: Sequence, extra: int, rng: random.Random, precision: int) -> list:
    """Insert ``extra`` collinear vertices at random positions along the
    existing segments of an open vertex list."""
    if extra <= 0:
        return list(points)
    segs = list(range(len(points) - 1))
    for prec in (precision, precision + 2, precision + 4, precision + 8):
        options = {i: _split_params(points[i], points[i + 1], prec) for i in segs}
        if sum(len(v) for v in options.values()) >= extra:
            break
    chosen: dict[int, set] = defaultdict(set)
    usable = [i for i in segs if options[i]]
    for _ in range(extra):
        usable = [i for i in usable if len(chosen[i]) < len(options[i])]
        i = rng.choice(usable)
        t = rng.choice([t for t in options[i] if t not in chosen[i]])
        chosen[i].add(t)
    out = []
    for i in segs:
        a, b = points[i], points[i + 1]
        out.append(a)
        for t in sorted(chosen[i]):
            out.append(tuple(float(Fraction(repr(u)) + t * (Fraction(repr(v)) - Fraction(repr(u)))) for u, v in zip(a, b)))
    out.append(points[-1])
    return out


def _densify_ring(ring: Sequence, rng: random.Random, precision: int) -> list:
    n = len(ring) - 1
    return _densify(ring, math.ceil(0.10 * n), rng, precision)


def synthesize_equal(g: Geometry, seed, precision: Optional[int] = None) -> Geometry:
    """A geometry topologically equal to ``g`` with a different encoding.

    Lines gain ``ceil(10%)`` interpolated vertices; polygons have their
    shell start rotated and every ring densified the same way.  New vertices
    prefer positions needing no more decimals than the input (or
    ``precision``), taking a few more only when a segment has no such
    position, so the result round-trips through WKT unchanged.
    """
    rng = random.Random(seed)
    prec = max(_max_decimals(g), 1) if precision is None else precision
    if isinstance(g, Point):
        if g.is_empty:
            raise UnsupportedType("cannot synthesize from an empty geometry")
        out: Geometry = Point(g.x, g.y)
    elif isinstance(g, LineString):
        if g.is_empty:
            raise UnsupportedType("cannot synthesize from an empty geometry")
        pts = list(g.points)
        out = LineString(_densify(pts, math.ceil(0.10 * len(pts)), rng, prec))
    elif isinstance(g, Polygon):
        if g.is_empty:
            raise UnsupportedType("cannot synthesize from an empty geometry")
        ring = list(g.shell[:-1])
        off = rng.randint(1, len(g.shell) - 2)
        shell = ring[off:] + ring[:off] + [ring[off]]
        out = Polygon(_densify_ring(shell, rng, prec), [_densify_ring(list(h), rng, prec) for h in g.holes])
    else:
        raise UnsupportedType(f"equals synthesis does not support {g.geom_type}")
    if classify(g, out, check=False) is not Predicate.EQUALS:
        raise DatasetError("synthesized geometry is not equal to its source")
    return out


# --------------------------------------------------------------------------
# disjoint sampling


def sample_disjoint(
    pool: Union[Corpus, Sequence[SpatialEntity], SpatialIndex],
    obj: SpatialEntity,
    buffer_d: float = 0.001,
    rng: Optional[random.Random] = None,
    exclude: Iterable[str] = (),
) -> SpatialEntity:
    """A pool entity disjoint from ``obj`` yet within ``buffer_d`` of it."""
    if buffer_d <= 0:
        raise ValueError("buffer_d must be positive")
    index = pool if isinstance(pool, SpatialIndex) else SpatialIndex(list(pool.values()) if isinstance(pool, Mapping) else pool)
    skip = set(exclude) | {obj.id}
    found = []
    for i in index.query(obj.geometry.bounds, buffer_d):
        e = index.entities[i]
        if e.id in skip:
            continue
        if boundary_distance(e.geometry, obj.geometry) > buffer_d:
            continue
        if classify(e.geometry, obj.geometry, check=False) is Predicate.DISJOINT:
            found.append(e)
    if not found:
        raise NoCandidate(f"no entity within {buffer_d} of {obj.id} is disjoint from it")
    found.sort(key=lambda e: e.id)
    return (rng or random.Random(0)).choice(found)


# --------------------------------------------------------------------------
# triplets


@dataclass(frozen=True)
class RelationTriplet:
    subject_id: str
    predicate: Predicate
    object_id: str
    type_a: str
    type_b: str
    split: Optional[str] = None

    @property
    def id(self) -> str:
        return f"{self.subject_id}|{self.predicate.value}|{self.object_id}"

    @property
    def combo(self) -> Combo:
        return (self.type_a, self.predicate, self.type_b)

    def to_dict(self) -> dict:
        return {
            "subject_id": self.subject_id,
            "predicate": self.predicate.value,
            "object_id": self.object_id,
            "type_a": self.type_a,
            "type_b": self.type_b,
            "split": self.split,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "RelationTriplet":
        return cls(str(d["subject_id"]), Predicate(d["predicate"]), str(d["object_id"]), d["type_a"], d["type_b"], d.get("split"))


def _combo_key(c: Combo) -> tuple:
    return (c[0], PREDICATES.index(c[1]), c[2])


def sort_triplets(triplets: Iterable[RelationTriplet]) -> list[RelationTriplet]:
    return sorted(triplets, key=lambda t: (_combo_key(t.combo), t.id))


def write_triplets(path: Union[str, Path], triplets: Iterable[RelationTriplet]) -> None:
    lines = [json.dumps(t.to_dict(), sort_keys=True) for t in sort_triplets(triplets)]
    _atomic_write(path, "".join(l + "\n" for l in lines))


def read_triplets(path: Union[str, Path]) -> list[RelationTriplet]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                out.append(RelationTriplet.from_dict(json.loads(line)))
            except (ValueError, KeyError, TypeError) as exc:
                raise ParseError(f"line {n}: {exc}", 0) from None
    return out


@dataclass
class TripletSample:
    triplets: list[RelationTriplet]
    entities: Corpus
    shortfall: dict[Combo, int] = field(default_factory=dict)

    def counts(self) -> dict[Combo, int]:
        return dict(Counter(t.combo for t in self.triplets))


def _triplet(a: SpatialEntity, p: Predicate, b: SpatialEntity) -> RelationTriplet:
    return RelationTriplet(a.id, p, b.id, a.geom_type, b.geom_type)


def verify_triplets(triplets: Iterable[RelationTriplet], corpus: Mapping[str, SpatialEntity]) -> list[str]:
    """Problems found when re-deriving every triplet from its geometries."""
    problems = []
    for t in triplets:
        a, b = corpus.get(t.subject_id), corpus.get(t.object_id)
        if a is None or b is None:
            problems.append(f"{t.id}: unknown entity")
            continue
        if (a.geom_type, b.geom_type) != (t.type_a, t.type_b):
            problems.append(f"{t.id}: types {a.geom_type}/{b.geom_type} recorded as {t.type_a}/{t.type_b}")
            continue
        if not is_valid_combination(t.type_a, t.predicate, t.type_b):
            problems.append(f"{t.id}: invalid combination")
            continue
        got = classify(a.geometry, b.geometry, check=False)
        if got is not t.predicate:
            shown = got.value if isinstance(got, (Predicate, Undetermined)) else got
            problems.append(f"{t.id}: classifies as {shown}")
    return problems


def _spatial_join(entities: list[SpatialEntity]) -> dict[Combo, list[tuple[str, str]]]:
    index = SpatialIndex(entities)
    found: dict[Combo, list[tuple[str, str]]] = defaultdict(list)
    for i, a in enumerate(entities):
        for j in index.query(a.geometry.bounds):
            if j <= i:
                continue
            b = entities[j]
            p = classify(a.geometry, b.geometry, check=False)
            if p in JOIN_PREDICATES:
                found[(a.geom_type, p, b.geom_type)].append((a.id, b.id))
                q = inverse(p)
                found[(b.geom_type, q, a.geom_type)].append((b.id, a.id))
    return found


def sample_triplets(
    corpus: Mapping[str, SpatialEntity],
    per_combo: int = 200,
    seed: int = 0,
    fewshot: int = 25,
    buffer_d: float = 0.001,
    strict: bool = True,
    progress: Optional[Callable[[str], None]] = None,
) -> TripletSample:
    """Sample ``per_combo + fewshot`` verified triplets for every valid
    (type, predicate, type) combination.

    Spatial-join pairs supply within/contains/overlaps/touches/crosses,
    synthesized copies supply equals, and nearby non-intersecting entities
    supply disjoint.  Only single-part entities take part.
    """
    rng = random.Random(seed)
    need = per_combo + fewshot
    entities = sorted((e for e in corpus.values() if e.geom_type in SIMPLE_TYPES), key=lambda e: e.id)
    by_id = {e.id: e for e in entities}
    by_type: dict[str, list[SpatialEntity]] = defaultdict(list)
    for e in entities:
        by_type[e.geom_type].append(e)
    say = progress or (lambda msg: None)

    say("spatial join")
    joined = _spatial_join(entities)
    triplets: list[RelationTriplet] = []
    added: Corpus = {}
    shortfall: dict[Combo, int] = {}
    index = {t: SpatialIndex(by_type[t]) for t in SIMPLE_TYPES}

    for combo in all_combinations():
        ta, p, tb = combo
        got: list[RelationTriplet] = []
        if p is Predicate.EQUALS:
            pool = by_type[ta]
            for src in rng.sample(pool, min(need, len(pool))):
                eq_id = f"{src.id}~eq"
                g = synthesize_equal(src.geometry, rng.randrange(2**32))
                twin = SpatialEntity(eq_id, g, src.name, src.place_type, "synthesized")
                added[eq_id] = twin
                got.append(_triplet(twin, p, src))
        elif p is Predicate.DISJOINT:
            objects = list(by_type[tb])
            rng.shuffle(objects)
            seen: set[tuple[str, str]] = set()
            for obj in objects:
                if len(got) >= need:
                    break
                try:
                    subj = sample_disjoint(index[ta], obj, buffer_d, rng)
                except NoCandidate:
                    continue
                if (subj.id, obj.id) in seen:
                    continue
                seen.add((subj.id, obj.id))
                got.append(_triplet(subj, p, obj))
        else:
            pairs = sorted(joined.get(combo, []))
            for s, o in rng.sample(pairs, min(need, len(pairs))):
                got.append(_triplet(by_id[s], p, by_id[o]))
        if len(got) < need:
            shortfall[combo] = len(got)
        say(f"{ta}/{p.value}/{tb}: {len(got)}")
        triplets.extend(got)

    lookup = {**by_id, **added}
    problems = verify_triplets(triplets, lookup)
    if problems:
        raise VerificationError(problems)
    sample = TripletSample(sort_triplets(triplets), added, shortfall)
    if shortfall and strict:
        raise ShortfallError(shortfall, sample)
    return sample


def split(
    triplets: Iterable[RelationTriplet],
    seed: int = 0,
    sizes: Mapping[str, int] = SPLIT_SIZES,
) -> list[RelationTriplet]:
    """Tag each combination's triplets train/eval/fewshot by seeded shuffle."""
    groups: dict[Combo, list[RelationTriplet]] = defaultdict(list)
    for t in triplets:
        groups[t.combo].append(t)
    total = sum(sizes.values())
    bad = {c: len(v) for c, v in groups.items() if len(v) != total}
    if bad:
        rows = ", ".join(f"{a}/{p.value}/{b}={n}" for (a, p, b), n in sorted(bad.items(), key=lambda kv: _combo_key(kv[0])))
        raise CountError(f"each combination needs exactly {total} triplets: {rows}")
    out = []
    for combo in sorted(groups, key=_combo_key):
        items = sorted(groups[combo], key=lambda t: t.id)
        random.Random(f"{seed}:{combo[0]}:{combo[1].value}:{combo[2]}").shuffle(items)
        start = 0
        for name in SPLITS:
            n = sizes[name]
            out.extend(replace(t, split=name) for t in items[start : start + n])
            start += n
    return sort_triplets(out)


def retrieval_corpus(triplets: Iterable[RelationTriplet]) -> list[RelationTriplet]:
    """Eval-split triplets without disjoint relations."""
    return sort_triplets(t for t in triplets if t.split == "eval" and t.predicate is not Predicate.DISJOINT)


# --------------------------------------------------------------------------
# vernacular descriptions

CONTEXT_KINDS = ("none", "place_type", "geometry_type", "place_name")


@lru_cache(maxsize=1)
def _synonyms() -> tuple[tuple[str, ...], dict[str, str]]:
    text = resources.files("toporel").joinpath("data/vernacular_synonyms.json").read_text(encoding="utf-8")
    d = json.loads(text)
    return tuple(d["articles"]), dict(d["synonyms"])


def unify_description(phrase: str, table: Optional[Mapping[str, str]] = None) -> str:
    """Canonical form of a vernacular relation phrase."""
    articles, synonyms = _synonyms()
    if table is not None:
        synonyms = dict(table)
    p = re.sub(r"\s+", " ", phrase.strip().lower()).strip(" .,;:")
    if p in synonyms:
        return synonyms[p]
    words = p.split(" ")
    while words and words[0] in articles:
        words = words[1:]
    stripped = " ".join(words)
    return synonyms.get(stripped, stripped or p)


@dataclass(frozen=True)
class VernacularRecord:
    subject: str
    description: str
    object: str
    predicate: Predicate
    place_type_a: Optional[str] = None
    place_type_b: Optional[str] = None
    geom_type_a: Optional[str] = None
    geom_type_b: Optional[str] = None

    def __post_init__(self):
        if not self.description.strip():
            raise ValueError("description must be non-empty")
        object.__setattr__(self, "predicate", Predicate(self.predicate))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["predicate"] = self.predicate.value
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "VernacularRecord":
        keys = cls.__dataclass_fields__
        return cls(**{k: d[k] for k in keys if k in d})


def read_vernacular(path: Union[str, Path]) -> list[VernacularRecord]:
    with open(path, encoding="utf-8") as fh:
        return [VernacularRecord.from_dict(json.loads(l)) for l in fh if l.strip()]


@dataclass(frozen=True)
class ConversionPair:
    description: str
    predicate: Predicate
    context_kind: str = "none"
    context: tuple[str, ...] = ()
    support: int = 0

    @property
    def id(self) -> str:
        ctx = "/".join(self.context) if self.context else "N/A"
        return f"{self.description}|{self.predicate.value}|{self.context_kind}|{ctx}"

    def to_dict(self) -> dict:
        return {
            "description": self.description,
            "predicate": self.predicate.value,
            "context_kind": self.context_kind,
            "context": list(self.context),
            "support": self.support,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ConversionPair":
        return cls(d["description"], Predicate(d["predicate"]), d.get("context_kind", "none"), tuple(d.get("context") or ()), int(d.get("support", 0)))


def write_pairs(path: Union[str, Path], pairs: Iterable[ConversionPair]) -> None:
    _atomic_write(path, "".join(json.dumps(p.to_dict(), sort_keys=True) + "\n" for p in pairs))


def read_pairs(path: Union[str, Path]) -> list[ConversionPair]:
    with open(path, encoding="utf-8") as fh:
        return [ConversionPair.from_dict(json.loads(l)) for l in fh if l.strip()]


def build_conversion_pairs(records: Iterable[VernacularRecord], seed: int = 0, min_support: int = 5, names_per_pair: int = 5) -> list[ConversionPair]:
    """Context-conditioned (description, predicate, context) pairs.

    A description with a single predicate overall yields a context-free
    pair.  Otherwise groups keyed by place types or geometry types that
    resolve to a single predicate yield conditioned pairs, and frequent
    (description, predicate) combinations yield place-name samples.
    """
    recs = [replace(r, description=unify_description(r.description)) for r in records]
    by_desc: dict[str, list[VernacularRecord]] = defaultdict(list)
    for r in recs:
        by_desc[r.description].append(r)
    rng = random.Random(seed)
    out: list[ConversionPair] = []
    for desc in sorted(by_desc):
        rows = by_desc[desc]
        preds = {r.predicate for r in rows}
        if len(preds) == 1:
            if len(rows) >= min_support:
                out.append(ConversionPair(desc, next(iter(preds)), "none", (), len(rows)))
            continue
        for kind, key in (
            ("place_type", lambda r: (r.place_type_a, r.place_type_b)),
            ("geometry_type", lambda r: (r.geom_type_a, r.geom_type_b)),
        ):
            groups: dict[tuple, list[VernacularRecord]] = defaultdict(list)
            for r in rows:
                k = key(r)
                if None not in k:
                    groups[k].append(r)
            for k in sorted(groups):
                g = groups[k]
                gp = {r.predicate for r in g}
                if len(gp) == 1 and len(g) >= min_support:
                    out.append(ConversionPair(desc, next(iter(gp)), kind, tuple(k), len(g)))
        for pred in PREDICATES:
            g = sorted((r for r in rows if r.predicate is pred), key=lambda r: (r.subject, r.object))
            if len(g) < min_support:
                continue
            for r in rng.sample(g, names_per_pair):
                out.append(ConversionPair(desc, pred, "place_name", (r.subject, r.object), len(g)))
    return out


# --------------------------------------------------------------------------
# relation extraction from text

_CONTAINMENT = {"in", "is in", "located in", "is located in", "within", "is within", "part of", "is part of"}


def _mentions(text: str, gazetteer: Mapping[str, object]) -> list[str]:
    names = []
    for name in sorted(gazetteer, key=len, reverse=True):
        if re.search(r"(?<!\w)" + re.escape(name) + r"(?!\w)", text) and not any(name in n for n in names):
            names.append(name)
    return sorted(names)


def extract_relations_from_text(abstract: str, gazetteer: Mapping[str, object], backend) -> list[tuple[str, str, str]]:
    """Direct (subject, phrase, object) relations stated in ``abstract``.

    ``backend`` is any object with ``chat(messages) -> str``; it is asked
    for one ``subject | phrase | object`` line per relation.  For
    hierarchical containment chains only the first (most direct) object of
    each subject is kept, and relations among the chain's objects are
    dropped.  Every result needs manual review before use.
    """
    from .prompts import render_extraction

    names = _mentions(abstract, gazetteer)
    if len(names) < 2:
        return []
    reply = backend.chat([{"role": "user", "content": render_extraction(abstract, names)}])
    raw = []
    for line in str(reply).splitlines():
        parts = [p.strip(" .\"'`-*") for p in line.split("|")]
        if len(parts) != 3 or not all(parts):
            continue
        s, phrase, o = parts
        if s in gazetteer and o in gazetteer and s != o:
            raw.append((s, phrase.lower(), o))
    chain_objects = {o for s, phrase, o in raw if phrase in _CONTAINMENT}
    out, placed = [], set()
    for s, phrase, o in raw:
        if phrase in _CONTAINMENT:
            if s in chain_objects or s in placed:
                continue
            placed.add(s)
        if (s, phrase, o) not in out:
            out.append((s, phrase, o))
    return out
