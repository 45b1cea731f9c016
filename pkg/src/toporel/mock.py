"""A deterministic offline chat backend that understands the task prompts.

Task 1 prompts are answered by running :func:`classify` on the two WKT
inputs and then applying scripted error rules.  Task 2 generation prompts
get a constructed geometry that provably holds the requested relation.
Task 3 prompts are answered from a description table.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .geometry import Geometry, LineString, Point, Polygon, components
from .topology import Predicate, classify
from .wkt import ParseError, parse_wkt, to_wkt

F = Fraction


@dataclass(frozen=True)
class ErrorRule:
    """Replace the true predicate ``truth`` by ``predicted`` for geometry
    type pair ``types`` (any pair when None) on a ``rate`` share of
    prompts.  ``predicted`` may also be ``"prose"`` (unparseable answer)
    or ``"types"`` (wrong geometry types)."""

    truth: str
    predicted: str
    types: Optional[tuple[str, str]] = None
    rate: float = 1.0

    @classmethod
    def parse(cls, text: str) -> "ErrorRule":
        """``truth->predicted[@TypeA/TypeB][:rate]``"""
        m = re.fullmatch(r"\s*(\w+)\s*->\s*(\w+)\s*(?:@\s*(\w+)\s*/\s*(\w+))?\s*(?::\s*([0-9.]+))?\s*", text)
        if not m:
            raise ValueError(f"bad error rule {text!r}; expected truth->predicted[@A/B][:rate]")
        truth, pred, ta, tb, rate = m.groups()
        return cls(truth.lower(), pred.lower(), (ta, tb) if ta else None, float(rate) if rate else 1.0)


def _unit_hash(*parts: str) -> float:
    h = hashlib.sha256("\x1f".join(parts).encode("utf-8")).digest()
    return int.from_bytes(h[:8], "big") / 2**64


_DEFAULT_TASK3 = (
    (r"\bhome to\b|\blocation of\b|\binclude|\bcontain", "contains"),
    (r"\bborder|\badjacent|\bneighbo|\bbounded|\bsurrounded|\benclave", "touches"),
    (r"\bpartly\b|\bpart of the population\b|\bextend|\bmostly\b|\boverlap", "overlaps"),
    (r"\bconnect|\bcross|\bruns through\b|\bflows through\b", "crosses"),
    (r"\bbetween\b|\bnear\b|\bmidway\b|\bhalfway\b", "disjoint"),
    (r"\bin\b|\bwithin\b|\bpart of\b|\bseat of\b|\bsuburb\b|\blocated\b", "within"),
)


class GeometryAwareMock:
    """Offline chat backend for all three tasks (see module docstring)."""

    def __init__(
        self,
        errors: Sequence[ErrorRule] = (),
        task3_table: Optional[Mapping[str, Sequence[str]]] = None,
        extraction: Optional[Mapping[str, str]] = None,
        model: str = "geometry-aware-mock",
    ):
        self.errors = tuple(ErrorRule.parse(e) if isinstance(e, str) else e for e in errors)
        self.task3_table = {k.lower(): list(v) for k, v in (task3_table or {}).items()}
        self.extraction = dict(extraction or {})
        self.model = model

    # chat backend protocol
    def complete(self, messages, temperature: float = 0.0, sample_index: int = 0) -> str:
        prompt = "\n\n".join(m["content"] for m in messages)
        return self.respond(prompt, sample_index)

    def chat(self, messages, sample_index: int = 0) -> str:
        if isinstance(messages, str):
            messages = [{"role": "user", "content": messages}]
        return self.complete(messages, 0.0, sample_index)

    def respond(self, prompt: str, sample_index: int = 0) -> str:
        gen = re.search(r"Generate an? (\w+) geometry in WKT format that (.+?) the reference geometry B\.", prompt)
        if gen:
            return self._task2(prompt, gen.group(1), gen.group(2))
        if "Geometry A:" in prompt and "Geometry B:" in prompt:
            return self._task1(prompt)
        st = re.search(r"Statement: A (.+) B\.", prompt)
        if st:
            return self._task3(st.group(1), sample_index)
        if "subject | relation phrase | object" in prompt:
            text = prompt.rsplit("Text:", 1)[-1].strip()
            return self.extraction.get(text, "")
        return "I cannot help with that request."

    # task 1
    def _task1(self, prompt: str) -> str:
        wa = re.findall(r"Geometry A: (.+)", prompt)[-1].strip()
        wb = re.findall(r"Geometry B: (.+)", prompt)[-1].strip()
        try:
            a, b = parse_wkt(wa), parse_wkt(wb)
            # rounding in the prompt can collapse a geometry
            p = classify(a, b)
        except (ParseError, ValueError):
            return "The geometries could not be read."
        truth = p.value if isinstance(p, Predicate) else "disjoint"
        ta, tb = a.geom_type, b.geom_type
        answer = truth
        for rule in self.errors:
            if rule.truth != truth or (rule.types and rule.types != (ta, tb)):
                continue
            if _unit_hash(wa, wb, rule.truth, rule.predicted) < rule.rate:
                answer = rule.predicted
                break
        if answer == "prose":
            return f"Geometry A looks {truth} with respect to geometry B."
        if answer == "types":
            ta, tb = tb, ta
            answer = truth
        tuple_text = f"({ta}, {answer}, {tb})"
        if "step by step" in prompt:
            return f"Comparing the interiors, boundaries and exteriors of A and B gives {answer}.\n{tuple_text}"
        return tuple_text

    # task 2
    def _task2(self, prompt: str, subject_type: str, verb: str) -> str:
        wb = re.findall(r"Geometry B: (.+)", prompt)[-1].strip()
        try:
            b = parse_wkt(wb)
        except (ParseError, ValueError):
            return "The reference geometry could not be read."
        verbs = {"is within": "within", "is disjoint from": "disjoint"}
        pred = Predicate(verbs.get(verb, verb))
        g = construct_related(b, subject_type, pred)
        if g is None:
            return f"No {subject_type} geometry can {verb} this geometry."
        return to_wkt(g, None)

    # task 3
    def _task3(self, description: str, sample_index: int) -> str:
        seq = self.task3_table.get(description.lower())
        if seq:
            ans = seq[sample_index % len(seq)]
        else:
            ans = next((p for pat, p in _DEFAULT_TASK3 if re.search(pat, description.lower())), "touches")
        preds = [s.strip() for s in ans.split("|") if s.strip()]
        if len(preds) == 1:
            return f"A {preds[0]} B"
        return f"A {preds[0]} B, or possibly " + ", or ".join(f"A {p} B" for p in preds[1:])


# --------------------------------------------------------------------------
# geometry construction


def _fr(c) -> tuple[Fraction, Fraction]:
    return (F(repr(float(c[0]))), F(repr(float(c[1]))))


def _fl(p) -> tuple[float, float]:
    return (float(p[0]), float(p[1]))


def _add(p, q, k=1):
    return (p[0] + k * q[0], p[1] + k * q[1])


def _sub(p, q):
    return (p[0] - q[0], p[1] - q[1])


def _square(c, h) -> Polygon:
    x, y = c
    return Polygon([_fl(p) for p in ((x - h, y - h), (x + h, y - h), (x + h, y + h), (x - h, y + h), (x - h, y - h))])


def _interior_point(g: Geometry):
    """A point of the interior of a single-part geometry, as fractions."""
    if isinstance(g, Point):
        return _fr((g.x, g.y))
    if isinstance(g, LineString):
        a, b = _fr(g.points[0]), _fr(g.points[1])
        return ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)
    ring = [_fr(c) for c in g.shell[:-1]]
    cx = sum(p[0] for p in ring) / len(ring)
    cy = sum(p[1] for p in ring) / len(ring)
    if classify(Point(*_fl((cx, cy))), g, check=False) is Predicate.WITHIN:
        return (cx, cy)
    ys = sorted({_fr(c)[1] for r in g.rings for c in r})
    mid = len(ys) // 2
    y = (ys[max(mid - 1, 0)] + ys[mid]) / 2
    xs = []
    for r in g.rings:
        for p, q in zip(r, r[1:]):
            p, q = _fr(p), _fr(q)
            if (p[1] < y) != (q[1] < y):
                xs.append(p[0] + (y - p[1]) * (q[0] - p[0]) / (q[1] - p[1]))
    xs.sort()
    return ((xs[0] + xs[1]) / 2, y)


def _scale(g: Geometry) -> Fraction:
    x0, y0, x1, y1 = (F(repr(v)) for v in g.bounds)
    s = max(x1 - x0, y1 - y0) / 4
    return s if s > 0 else F(1, 10**4)


def _candidates(b: Geometry, kind: str, p: Predicate, s: Fraction):
    """Candidate geometries of type ``kind`` meant to hold ``p`` with ``b``
    at construction scale ``s``."""
    x0, y0, x1, y1 = (F(repr(v)) for v in b.bounds)
    far = (x1 + s, y1 + s)
    c = _interior_point(b)
    if p is Predicate.DISJOINT:
        if kind == "Point":
            yield Point(*_fl(far))
        elif kind == "LineString":
            yield LineString([_fl(far), _fl(_add(far, (s, s)))])
        else:
            yield _square(_add(far, (s, s)), s / 2)
        return
    if p is Predicate.EQUALS:
        yield b
        return
    if kind == "Point":
        if p is Predicate.WITHIN:
            yield Point(*_fl(c))
        elif p is Predicate.TOUCHES:
            if isinstance(b, LineString):
                yield Point(*b.points[0])
            elif isinstance(b, Polygon):
                yield Point(*b.shell[0])
        return
    if isinstance(b, Point):
        pb = _fr((b.x, b.y))
        if kind == "LineString":
            if p is Predicate.CONTAINS:
                yield LineString([_fl(_add(pb, (-s, 0))), _fl(_add(pb, (s, 0)))])
            elif p is Predicate.TOUCHES:
                yield LineString([_fl(pb), _fl(_add(pb, (s, s)))])
        else:
            if p is Predicate.CONTAINS:
                yield _square(pb, s)
            elif p is Predicate.TOUCHES:
                yield _square(_add(pb, (s, s)), s)
        return
    if isinstance(b, LineString):
        a0, a1 = _fr(b.points[0]), _fr(b.points[1])
        z0, z1 = _fr(b.points[-1]), _fr(b.points[-2])
        d = _sub(a1, a0)
        perp = (-d[1], d[0])
        m = ((a0[0] + a1[0]) / 2, (a0[1] + a1[1]) / 2)
        if kind == "LineString":
            if p is Predicate.WITHIN:
                yield LineString([_fl(a0), _fl(m)])
            elif p is Predicate.CONTAINS:
                back = _sub(a0, d)
                fwd = _add(z0, _sub(z0, z1))
                yield LineString([_fl(back)] + list(b.points) + [_fl(fwd)])
            elif p is Predicate.OVERLAPS:
                yield LineString([_fl(m), _fl(a0), _fl(_sub(a0, _sub(m, a0)))])
            elif p is Predicate.TOUCHES:
                k = s / max(abs(perp[0]) + abs(perp[1]), F(1, 10**12))
                yield LineString([_fl(a0), _fl(_add(a0, _sub(a0, a1)))])
                yield LineString([_fl(a0), _fl(_add(a0, perp, k))])
            elif p is Predicate.CROSSES:
                k = s / max(abs(perp[0]) + abs(perp[1]), F(1, 10**12))
                yield LineString([_fl(_add(m, perp, -k)), _fl(_add(m, perp, k))])
        else:
            if p is Predicate.CONTAINS:
                yield _square(((x0 + x1) / 2, (y0 + y1) / 2), max(x1 - x0, y1 - y0) / 2 + s)
            elif p is Predicate.CROSSES:
                yield _square(m, s)
            elif p is Predicate.TOUCHES:
                out = _sub(a0, a1)
                norm = max(abs(out[0]), abs(out[1]))
                u = (out[0] / norm * s, out[1] / norm * s)
                yield _square(_add(a0, u), s)
        return
    # polygon reference
    v = _fr(b.shell[0])
    if kind == "LineString":
        if p is Predicate.WITHIN:
            yield LineString([_fl(_add(c, (-s, 0))), _fl(_add(c, (s, 0)))])
        elif p is Predicate.CROSSES:
            yield LineString([_fl(c), _fl((x1 + s, c[1]))])
        elif p is Predicate.TOUCHES:
            yield LineString([_fl(v), _fl(_add(v, _sub(v, c)))])
    else:
        if p is Predicate.WITHIN:
            yield _square(c, s)
        elif p is Predicate.CONTAINS:
            yield _square(((x0 + x1) / 2, (y0 + y1) / 2), max(x1 - x0, y1 - y0) / 2 + s)
        elif p is Predicate.OVERLAPS:
            yield _square(v, s)
        elif p is Predicate.TOUCHES:
            lx = min((_fr(q) for q in b.shell), key=lambda q: (q[0], q[1]))
            yield Polygon([_fl(q) for q in ((lx[0] - 2 * s, lx[1] - s), lx, (lx[0] - 2 * s, lx[1] + s), (lx[0] - 2 * s, lx[1] - s))])


def construct_related(b: Geometry, kind: str, predicate: Predicate, attempts: int = 24) -> Optional[Geometry]:
    """A ``kind`` geometry standing in relation ``predicate`` to ``b``, or
    None when no construction verifies."""
    kind = {"point": "Point", "linestring": "LineString", "polygon": "Polygon"}.get(kind.lower(), kind)
    parts = components(b)
    if len(parts) != 1:
        b = parts[0]
    s = _scale(b)
    for _ in range(attempts):
        for g in _candidates(b, kind, predicate, s):
            if g.is_valid and classify(g, b, check=False) is predicate:
                return g
        s /= 2
    return None
