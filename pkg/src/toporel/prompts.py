"""Prompt rendering for the three tasks and tolerant answer parsing.

Template text lives in plain ``.txt`` assets with ``{placeholder}`` slots;
:attr:`TemplateSet.hash` pins the exact wording used by a run.
"""
from __future__ import annotations

import hashlib
import random
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

from .geometry import TYPE_NAMES, Geometry, dimension
from .topology import PREDICATES, Predicate, applicable_predicates, relate, predicate_of
from .wkt import ParseError, find_wkt, parse_wkt, to_wkt

TASK1_STYLES = ("zero", "zero_dim", "few", "zero_cot", "few_cot")
TASK2_STYLES = ("zero", "zero_check", "few", "few_negative")
TASK3_STYLES = ("with_context", "without_context")

VERBS = {
    Predicate.EQUALS: "equals",
    Predicate.WITHIN: "is within",
    Predicate.CONTAINS: "contains",
    Predicate.OVERLAPS: "overlaps",
    Predicate.TOUCHES: "touches",
    Predicate.CROSSES: "crosses",
    Predicate.DISJOINT: "is disjoint from",
}

_TYPES = {t.lower(): t for t in TYPE_NAMES}


class ExampleError(ValueError):
    pass


class PoolExhausted(ValueError):
    pass


class StyleError(ValueError):
    pass


class TemplateSet:
    """Named template texts loaded from a directory (the packaged set by
    default)."""

    def __init__(self, texts: Mapping[str, str]):
        self.texts = dict(texts)
        h = hashlib.sha256()
        for name in sorted(self.texts):
            h.update(name.encode() + b"\0" + self.texts[name].encode("utf-8") + b"\0")
        self.hash = h.hexdigest()

    @classmethod
    def load(cls, directory: Union[str, Path, None] = None) -> "TemplateSet":
        texts = {}
        if directory is None:
            root = resources.files("toporel").joinpath("templates")
            for item in root.iterdir():
                if item.name.endswith(".txt"):
                    texts[item.name[:-4]] = item.read_text(encoding="utf-8")
        else:
            for p in Path(directory).glob("*.txt"):
                texts[p.stem] = p.read_text(encoding="utf-8")
        base = cls._default_texts() if directory is not None else {}
        return cls({**base, **texts})

    @staticmethod
    def _default_texts() -> dict[str, str]:
        return dict(default_templates().texts)

    def render(self, name: str, **values) -> str:
        try:
            return self.texts[name].format(**values)
        except KeyError as exc:
            raise StyleError(f"template {name!r} is missing or lacks slot {exc}") from None


_DEFAULT: Optional[TemplateSet] = None


def default_templates() -> TemplateSet:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = TemplateSet.load()
    return _DEFAULT


def _t(templates: Optional[TemplateSet]) -> TemplateSet:
    return templates or default_templates()


# --------------------------------------------------------------------------
# task 1


@dataclass(frozen=True)
class Task1Example:
    wkt_a: str
    wkt_b: str
    type_a: str
    predicate: Predicate
    type_b: str
    rationale: Optional[str] = None
    id: str = ""

    @property
    def answer(self) -> str:
        return f"({self.type_a}, {Predicate(self.predicate).value}, {self.type_b})"


def _has(m, row: str, col: str) -> str:
    e = m.entry(row, col)
    return "empty" if e == "F" else f"dimension {e}"


_REASONS = {
    Predicate.EQUALS: "A and B have the same interior and no part of either lies in the exterior of the other",
    Predicate.WITHIN: "the interiors meet and no part of A lies in the exterior of B",
    Predicate.CONTAINS: "the interiors meet and no part of B lies in the exterior of A",
    Predicate.OVERLAPS: "A and B have the same dimension, the interiors meet, and each has interior points outside the other",
    Predicate.TOUCHES: "the interiors do not meet but the geometries share boundary points",
    Predicate.CROSSES: "the interiors meet in a lower dimension and the interior of one geometry extends into the exterior of the other",
    Predicate.DISJOINT: "the geometries share no point at all",
}


def decision_rationale(a: Geometry, b: Geometry) -> str:
    """Step-by-step trace of the interior/boundary/exterior tests that
    decide the predicate of ``(a, b)``."""
    m = relate(a, b, check=False)
    p = predicate_of(m, dimension(a), dimension(b))
    lines = [
        f"dim(A) = {dimension(a)}, dim(B) = {dimension(b)}.",
        f"Interior(A) and Interior(B): {_has(m, 'I', 'I')}. Boundary(A) and Boundary(B): {_has(m, 'B', 'B')}.",
        f"Interior(A) and Exterior(B): {_has(m, 'I', 'E')}. Boundary(A) and Exterior(B): {_has(m, 'B', 'E')}.",
        f"Exterior(A) and Interior(B): {_has(m, 'E', 'I')}. Exterior(A) and Boundary(B): {_has(m, 'E', 'B')}.",
    ]
    for q in PREDICATES:
        if q is p:
            lines.append(f"Is it {q.value}? Yes: {_REASONS[q]}.")
            break
        lines.append(f"Is it {q.value}? No.")
    return "Reasoning: " + " ".join(lines) + "\n"


def render_task1(
    wkt_a: str,
    wkt_b: str,
    style: str = "zero",
    examples: Sequence[Task1Example] = (),
    templates: Optional[TemplateSet] = None,
) -> str:
    """Prompt asking for the (type, predicate, type) tuple of A and B."""
    if style not in TASK1_STYLES:
        raise StyleError(f"unknown task 1 style {style!r}")
    few = style.startswith("few")
    if few and not examples:
        raise ExampleError(f"style {style!r} needs at least one example")
    if not few and examples:
        raise ExampleError(f"style {style!r} takes no examples")
    T = _t(templates)
    parts = [T.render("task1_instruction")]
    if style == "zero_dim":
        da, db = (dimension(parse_wkt(w)) for w in (wkt_a, wkt_b))
        parts.append(T.render("task1_dimension", dim_a="empty" if da is None else da, dim_b="empty" if db is None else db))
    for i, ex in enumerate(examples, start=1):
        rationale = ""
        if style == "few_cot":
            rationale = ex.rationale or decision_rationale(parse_wkt(ex.wkt_a), parse_wkt(ex.wkt_b))
        parts.append(T.render("task1_example", number=i, wkt_a=ex.wkt_a, wkt_b=ex.wkt_b, rationale=rationale, answer=ex.answer))
    cue = T.render("task1_cot_cue" if style == "zero_cot" else "task1_cue").strip()
    parts.append(T.render("task1_query", wkt_a=wkt_a, wkt_b=wkt_b, cue=cue))
    return "\n".join(p.rstrip("\n") + "\n" for p in parts)


def select_fewshot_examples(pool: Iterable, combo: Sequence[str], k: Optional[int] = None, seed: int = 0) -> list:
    """Examples for a query of geometry types ``combo``.

    One example per applicable predicate first, then round-robin over the
    predicates until ``k`` examples are chosen.  Pool items need
    ``type_a``, ``predicate``, ``type_b`` and ``id`` attributes.
    """
    ta, tb = combo[0], combo[-1]
    preds = applicable_predicates(ta, tb)
    k = len(preds) if k is None else k
    rng = random.Random(seed)
    groups = {}
    for p in preds:
        g = sorted((x for x in pool if x.type_a == ta and x.type_b == tb and Predicate(x.predicate) is p), key=lambda x: x.id)
        rng.shuffle(g)
        groups[p] = g
    if k > sum(len(g) for g in groups.values()):
        raise PoolExhausted(f"{k} examples requested for {ta}/{tb}, pool has {sum(len(g) for g in groups.values())}")
    out, depth = [], 0
    while len(out) < k:
        for p in preds:
            if depth < len(groups[p]) and len(out) < k:
                out.append(groups[p][depth])
        depth += 1
    return out


# --------------------------------------------------------------------------
# task 2


def _wkt_of(g: Union[Geometry, str], precision: Optional[int] = 6) -> str:
    return g if isinstance(g, str) else to_wkt(g, precision)


def render_task2_query(
    predicate,
    wkt_b: str,
    subject_type: Optional[str] = None,
    expansion: Sequence[Union[Geometry, str]] = (),
) -> str:
    """Retrieval query, optionally typed and expanded with generated WKT."""
    p = Predicate(predicate)
    kind = f"{subject_type.upper()} geometry" if subject_type else "geometry"
    text = f"Retrieve a {kind} that {VERBS[p]} the {wkt_b}."
    for g in expansion:
        text += "\n" + _wkt_of(g)
    return text


def render_task2_object_query(predicate, wkt_a: str, object_type: str) -> str:
    """Object query phrased with the subject-to-object predicate."""
    return f"Retrieve a {object_type.upper()} geometry which the {wkt_a} {VERBS[Predicate(predicate)]}."


@dataclass(frozen=True)
class Task2Example:
    query: str
    good: str
    bad: Optional[str] = None


def render_task2_generation(
    predicate,
    wkt_b: str,
    subject_type: str,
    style: str = "zero",
    examples: Sequence[Task2Example] = (),
    templates: Optional[TemplateSet] = None,
) -> str:
    """Prompt asking for one WKT geometry related to B by ``predicate``."""
    if style not in TASK2_STYLES:
        raise StyleError(f"unknown task 2 style {style!r}")
    p = Predicate(predicate)
    few = style.startswith("few")
    if few and not examples:
        raise ExampleError(f"style {style!r} needs at least one example")
    if style == "few_negative" and not any(e.bad for e in examples):
        raise ExampleError("few_negative needs examples with a bad response")
    T = _t(templates)
    parts = [T.render("task2_instruction", subject_type=subject_type.upper(), verb=VERBS[p], wkt_b=wkt_b, predicate=p.value)]
    if style == "zero_check":
        parts.append(T.render("task2_check", predicate=p.value))
    if few:
        parts.append("Examples:")
        for ex in examples:
            block = T.render("task2_example", query=ex.query, good=ex.good)
            if style == "few_negative" and ex.bad:
                block = block.rstrip("\n") + "\n" + T.render("task2_negative", bad=ex.bad)
            parts.append(block)
    return "\n".join(x.rstrip("\n") + "\n" for x in parts)


# --------------------------------------------------------------------------
# task 3 and extraction


def context_sentence(kind: str, context: Sequence[str]) -> str:
    if kind in (None, "none") or not context:
        return ""
    a, b = context[0], context[-1]
    if kind == "geometry_type":
        return f"A is {a}, and B is {b}."
    if kind == "place_type":
        return f"A is {a}, and B is {b}."
    if kind == "place_name":
        return f"A is {a}, B is {b}."
    raise StyleError(f"unknown context kind {kind!r}")


def render_task3(
    description: str,
    context_kind: str = "none",
    context: Sequence[str] = (),
    templates: Optional[TemplateSet] = None,
) -> str:
    """Vernacular-to-predicate conversion prompt with symbolic places."""
    ctx = context_sentence(context_kind, context)
    return _t(templates).render("task3", description=description, context=(ctx + "\n") if ctx else "")


def render_extraction(text: str, names: Sequence[str], templates: Optional[TemplateSet] = None) -> str:
    return _t(templates).render("extraction", text=text, names="; ".join(names))


# --------------------------------------------------------------------------
# parsing


@dataclass(frozen=True)
class ParsedAnswer:
    raw: str
    ok: bool
    type_a: Optional[str] = None
    predicate: Optional[str] = None
    type_b: Optional[str] = None
    geometry: Optional[Geometry] = field(default=None, compare=False)
    candidates: tuple[str, ...] = ()
    error: Optional[str] = None

    @property
    def multi(self) -> bool:
        return len(self.candidates) > 1

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "type_a": self.type_a,
            "predicate": self.predicate,
            "type_b": self.type_b,
            "wkt": to_wkt(self.geometry) if self.geometry is not None else None,
            "candidates": list(self.candidates),
            "error": self.error,
        }


_TRIPLE = re.compile(r"\(\s*([A-Za-z][A-Za-z_ -]*?)\s*,\s*([A-Za-z][A-Za-z_ -]*?)\s*,\s*([A-Za-z][A-Za-z_ -]*?)\s*\)")


def _norm_type(t: str) -> str:
    key = re.sub(r"[\s_-]+", "", t).lower()
    return _TYPES.get(key, t.strip())


def parse_task1_answer(text) -> ParsedAnswer:
    """The last ``(type, predicate, type)`` triple in ``text``."""
    raw = text if isinstance(text, str) else str(text)
    found = _TRIPLE.findall(raw)
    if not found:
        return ParsedAnswer(raw, False, error="FormatInvalid")
    ta, p, tb = found[-1]
    return ParsedAnswer(raw, True, _norm_type(ta), re.sub(r"\s+", " ", p).strip().lower(), _norm_type(tb))


def parse_generated_geometry(text, expected_type: Optional[str] = None) -> ParsedAnswer:
    """The first WKT geometry in ``text`` if it parses and is valid."""
    raw = text if isinstance(text, str) else str(text)
    w = find_wkt(raw)
    if w is None:
        return ParsedAnswer(raw, False, error="Invalid: no WKT found")
    try:
        g = parse_wkt(w)
    except (ParseError, ValueError) as exc:
        return ParsedAnswer(raw, False, error=f"Invalid: {exc}")
    if g.is_empty:
        return ParsedAnswer(raw, False, error="Invalid: empty geometry")
    if not g.is_valid:
        return ParsedAnswer(raw, False, geometry=g, error=f"Invalid: {g.violations[0].rule}")
    return ParsedAnswer(raw, True, type_a=g.geom_type, geometry=g)


_PRED_WORD = re.compile(r"\b(" + "|".join(p.value for p in PREDICATES) + r")\b", re.I)


def parse_task3_answer(text) -> ParsedAnswer:
    """First predicate word stated as the answer, plus all candidates."""
    raw = text if isinstance(text, str) else str(text)
    tail = raw
    marks = [m.end() for m in re.finditer(r"answer\s*:", raw, re.I)]
    if marks and _PRED_WORD.search(raw[marks[-1]:]):
        tail = raw[marks[-1]:]
    seen: list[str] = []
    for m in _PRED_WORD.finditer(tail):
        w = m.group(1).lower()
        if w not in seen:
            seen.append(w)
    if not seen:
        return ParsedAnswer(raw, False, error="Invalid: no predicate mentioned")
    return ParsedAnswer(raw, True, predicate=seen[0], candidates=tuple(seen))
