"""End-to-end runs of the three tasks, their metrics, and report files."""
from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .dataset import ConversionPair, RelationTriplet, SpatialEntity, SpatialIndex, _atomic_write
from .geometry import SIMPLE_TYPES
from .llm import AuthError, BackendError, ChatClient, EmbeddingClient, map_ordered
from .neighborhood import NotApplicable, topological_distance
from .prompts import (
    ParsedAnswer,
    Task1Example,
    Task2Example,
    TemplateSet,
    parse_generated_geometry,
    parse_task1_answer,
    parse_task3_answer,
    render_task1,
    render_task2_generation,
    render_task2_object_query,
    render_task2_query,
    render_task3,
    select_fewshot_examples,
)
from .topology import PREDICATES, Predicate, classify, inverse, is_valid_combination
from .wkt import to_wkt

QUERY_MODES = ("direct", "typed", "expanded_1", "expanded_3", "object_original", "object_reversed")
PREDICATE_NAMES = tuple(p.value for p in PREDICATES)


# decimals of coordinates shown to models; None writes them exactly
TEXT_PRECISION: Optional[int] = 6


def set_text_precision(precision: Optional[int]) -> None:
    global TEXT_PRECISION
    if precision is not None and precision < 0:
        raise ValueError("precision must be >= 0")
    TEXT_PRECISION = precision


def geom_text(e: SpatialEntity) -> str:
    """The WKT text used for an entity in prompts and embeddings."""
    return to_wkt(e.geometry, TEXT_PRECISION)


def _mean(xs: Sequence[float]) -> Optional[float]:
    return sum(xs) / len(xs) if xs else None


def _ratio(a: int, b: int) -> Optional[float]:
    return a / b if b else None


# --------------------------------------------------------------------------
# task 1


@dataclass(frozen=True)
class Task1Item:
    id: str
    wkt_a: str
    wkt_b: str
    type_a: str
    predicate: Predicate
    type_b: str

    @property
    def truth(self) -> tuple[str, str, str]:
        return (self.type_a, self.predicate.value, self.type_b)


def task1_items(triplets: Iterable[RelationTriplet], corpus: Mapping[str, SpatialEntity]) -> list[Task1Item]:
    out = [
        Task1Item(t.id, geom_text(corpus[t.subject_id]), geom_text(corpus[t.object_id]), t.type_a, t.predicate, t.type_b)
        for t in triplets
    ]
    return sorted(out, key=lambda i: i.id)


def task1_examples(triplets: Iterable[RelationTriplet], corpus: Mapping[str, SpatialEntity]) -> list[Task1Example]:
    return [Task1Example(i.wkt_a, i.wkt_b, i.type_a, i.predicate, i.type_b, id=i.id) for i in task1_items(triplets, corpus)]


@dataclass
class EvalRecord:
    item_id: str
    task: str
    style: str
    prompt: str
    response: str
    parsed: dict
    truth: tuple[str, str, str]
    format_valid: bool = False
    types_valid: bool = False
    combo_valid: bool = False
    correct: bool = False
    distance: Optional[int] = None
    error: Optional[str] = None

    @property
    def predicted(self) -> Optional[tuple[str, str, str]]:
        if not self.format_valid:
            return None
        return (self.parsed["type_a"], self.parsed["predicate"], self.parsed["type_b"])

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "task": self.task,
            "style": self.style,
            "prompt": self.prompt,
            "response": self.response,
            "parsed": self.parsed,
            "truth": list(self.truth),
            "format_valid": self.format_valid,
            "types_valid": self.types_valid,
            "combo_valid": self.combo_valid,
            "correct": self.correct,
            "distance": self.distance,
            "error": self.error,
        }


def judge_task1(item_id: str, style: str, prompt: str, response: str, parsed: ParsedAnswer, truth: tuple[str, str, str]) -> EvalRecord:
    """Verdict chain: format, then geometry types, then a valid
    (type, predicate, type) combination, then correctness."""
    ta, p, tb = truth
    rec = EvalRecord(item_id, "task1", style, prompt, response, parsed.to_dict(), truth)
    rec.format_valid = parsed.ok
    rec.types_valid = rec.format_valid and (parsed.type_a, parsed.type_b) == (ta, tb)
    rec.combo_valid = rec.types_valid and is_valid_combination(ta, parsed.predicate, tb)
    rec.correct = rec.combo_valid and parsed.predicate == p
    if rec.combo_valid and not rec.correct:
        rec.distance = topological_distance((ta, tb), parsed.predicate, p)
    return rec


def run_task1(
    items: Sequence[Task1Item],
    client: ChatClient,
    style: str = "zero",
    pool: Sequence[Task1Example] = (),
    k: Optional[int] = None,
    seed: int = 0,
    templates: Optional[TemplateSet] = None,
    max_concurrency: Optional[int] = None,
) -> list[EvalRecord]:
    """Ask the backend about every item and judge the answers."""
    items = sorted(items, key=lambda i: i.id)
    shots: dict[tuple[str, str], list] = {}
    if style.startswith("few"):
        for combo in sorted({(i.type_a, i.type_b) for i in items}):
            shots[combo] = select_fewshot_examples(pool, combo, k, seed)

    def one(item: Task1Item) -> EvalRecord:
        prompt = render_task1(item.wkt_a, item.wkt_b, style, shots.get((item.type_a, item.type_b), ()), templates)
        try:
            response = client.chat(prompt)
        except AuthError:
            raise
        except BackendError as exc:
            return EvalRecord(item.id, "task1", style, prompt, "", {}, item.truth, error=str(exc))
        return judge_task1(item.id, style, prompt, response, parse_task1_answer(response), item.truth)

    return map_ordered(one, items, max_concurrency or client.max_concurrency)


def classifier_records(items: Sequence[Task1Item], labels: Sequence[tuple[str, str, str]], style: str = "random_forest") -> list[EvalRecord]:
    """Records for predictions made directly as label tuples."""
    out = []
    for item, (ta, p, tb) in zip(items, labels):
        text = f"({ta}, {p}, {tb})"
        out.append(judge_task1(item.id, style, "", text, parse_task1_answer(text), item.truth))
    return sorted(out, key=lambda r: r.item_id)


def task1_metrics(records: Iterable[EvalRecord]) -> dict:
    """Validity rates (each conditional on the previous check), accuracy
    over valid outputs and over all outputs, and Dist(Incorrect)."""
    records = list(records)
    recs = sorted((r for r in records if r.error is None), key=lambda r: r.item_id)
    errors = len(records) - len(recs)
    n = len(recs)
    nf = sum(r.format_valid for r in recs)
    nt = sum(r.types_valid for r in recs)
    nc = sum(r.combo_valid for r in recs)
    ok = sum(r.correct for r in recs)
    dists = [r.distance for r in recs if r.combo_valid and not r.correct]
    return {
        "n": n,
        "errors": errors,
        "format_validity": _ratio(nf, n),
        "geometry_type_validity": _ratio(nt, nf),
        "predicate_validity": _ratio(nc, nt),
        "accuracy": _ratio(ok, nc),
        "accuracy_all": _ratio(ok, n),
        "invalid_rate": _ratio(n - nc, n),
        "incorrect_rate": _ratio(nc - ok, n),
        "dist_incorrect": _mean(dists),
        "dist_incorrect_count": len(dists),
        "dist_incorrect_empty": not dists,
    }


@dataclass
class ConfusionMatrix:
    """Truth-by-prediction counts in the fixed predicate order, plus an
    off-matrix bucket of invalid outputs per truth row."""

    combo: Optional[tuple[str, str]]
    counts: list[list[int]]
    invalid: list[int]

    @property
    def total(self) -> int:
        return sum(map(sum, self.counts)) + sum(self.invalid)

    def cell(self, truth, predicted) -> int:
        return self.counts[PREDICATE_NAMES.index(Predicate(truth).value)][PREDICATE_NAMES.index(Predicate(predicted).value)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["truth\\predicted", *PREDICATE_NAMES, "invalid"])
        for name, row, inv in zip(PREDICATE_NAMES, self.counts, self.invalid):
            w.writerow([name, *row, inv])
        return buf.getvalue()


def confusion(records: Iterable[EvalRecord], combo: Optional[Sequence[str]] = None) -> ConfusionMatrix:
    key = tuple(combo) if combo is not None else None
    counts = [[0] * len(PREDICATE_NAMES) for _ in PREDICATE_NAMES]
    invalid = [0] * len(PREDICATE_NAMES)
    for r in records:
        if r.error is not None:
            continue
        if key is not None and (r.truth[0], r.truth[2]) != key:
            continue
        t = PREDICATE_NAMES.index(r.truth[1])
        if r.combo_valid:
            counts[t][PREDICATE_NAMES.index(r.parsed["predicate"])] += 1
        else:
            invalid[t] += 1
    return ConfusionMatrix(key, counts, invalid)


# --------------------------------------------------------------------------
# task 2


@dataclass(frozen=True)
class RankResult:
    query_id: str
    ranked: tuple[str, ...]
    rank: Optional[int]

    def to_dict(self) -> dict:
        return {"query_id": self.query_id, "rank": self.rank, "top": list(self.ranked[:20])}


def rank_candidates(
    query_vec: Sequence[float],
    cand_vecs: np.ndarray,
    cand_ids: Sequence[str],
    target_id: str,
    filter_ids: Iterable[str] = (),
    query_id: str = "",
) -> RankResult:
    """Filtered cosine ranking; ties broken by candidate id."""
    q = np.asarray(query_vec, dtype=float)
    M = np.atleast_2d(np.asarray(cand_vecs, dtype=float))
    if M.shape[1] != q.shape[0]:
        raise ValueError(f"query has dimension {q.shape[0]}, candidates {M.shape[1]}")
    drop = set(filter_ids) - {target_id}
    qn = np.linalg.norm(q)
    norms = np.linalg.norm(M, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        sims = np.where((norms > 0) & (qn > 0), M @ q / (norms * qn), 0.0)
    keep = [(-float(s), cid) for s, cid in zip(sims, cand_ids) if cid not in drop]
    keep.sort()
    ranked = tuple(cid for _, cid in keep)
    rank = ranked.index(target_id) + 1 if target_id in ranked else None
    return RankResult(query_id, ranked, rank)


def mrr_hits(ranks: Sequence[Optional[int]], ks: Sequence[int] = (5, 10, 20)) -> dict:
    n = len(ranks)
    out = {"n": n, "mrr": _ratio(sum(1.0 / r for r in ranks if r), n) if n else None}
    for k in ks:
        out[f"hits@{k}"] = _ratio(sum(1 for r in ranks if r is not None and r <= k), n) if n else None
    return out


@dataclass(frozen=True)
class Task2Query:
    id: str
    mode: str
    reference_id: str
    target_id: str
    predicate: Predicate
    target_type: str
    reference_type: str


def task2_queries(triplets: Iterable[RelationTriplet], mode: str) -> list[Task2Query]:
    """One query per triplet.  Subject modes search for the subject given
    the object; object modes search for the object given the subject."""
    if mode not in QUERY_MODES:
        raise ValueError(f"unknown query mode {mode!r}")
    out = []
    for t in triplets:
        if mode.startswith("object"):
            out.append(Task2Query(t.id, mode, t.subject_id, t.object_id, t.predicate, t.type_b, t.type_a))
        else:
            out.append(Task2Query(t.id, mode, t.object_id, t.subject_id, t.predicate, t.type_a, t.type_b))
    return sorted(out, key=lambda q: q.id)


def _target_relation(q: Task2Query) -> Predicate:
    """Relation from a target candidate to the reference."""
    return inverse(q.predicate) if q.mode.startswith("object") else q.predicate


@dataclass
class GenerationRecord:
    query_id: str
    sample_index: int
    prompt: str
    response: str
    requested_type: str
    requested: str
    valid_wkt: bool = False
    type_match: bool = False
    predicate_match: bool = False
    got: Optional[str] = None
    distance: Optional[int] = None
    wkt: Optional[str] = None
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def judge_generation(query_id: str, sample_index: int, prompt: str, response: str, reference: SpatialEntity, kind: str, predicate: Predicate) -> GenerationRecord:
    rec = GenerationRecord(query_id, sample_index, prompt, response, kind, predicate.value)
    parsed = parse_generated_geometry(response)
    if not parsed.ok:
        rec.error = parsed.error
        return rec
    g = parsed.geometry
    rec.valid_wkt = True
    rec.wkt = to_wkt(g, TEXT_PRECISION)
    rec.type_match = g.geom_type == kind
    if rec.type_match:
        got = classify(g, reference.geometry, check=False)
        rec.got = got.value
        rec.predicate_match = got is predicate
        if not rec.predicate_match:
            try:
                rec.distance = topological_distance((kind, reference.geom_type), got, predicate)
            except NotApplicable:
                rec.distance = None
    return rec


def generation_metrics(records: Iterable[GenerationRecord]) -> dict:
    recs = [r for r in records if not (r.error or "").startswith("backend:")]
    n = len(recs)
    nv = sum(r.valid_wkt for r in recs)
    nt = sum(r.type_match for r in recs)
    npred = sum(r.predicate_match for r in recs)
    dists = [r.distance for r in recs if r.type_match and not r.predicate_match and r.distance is not None]
    return {
        "n": n,
        "valid_wkt": _ratio(nv, n),
        "geometry_type": _ratio(nt, nv),
        "predicate": _ratio(npred, nt),
        "topological_distance": _mean(dists),
    }


def generation_examples(triplets: Sequence[RelationTriplet], corpus: Mapping[str, SpatialEntity], kind: str, ref_type: str, predicate: Predicate, k: int = 3, negative: bool = False) -> list[Task2Example]:
    """Worked generation examples from few-shot triplets of the same
    types and predicate; negatives are same-type subjects that do not hold
    the predicate with the example's reference."""
    same = sorted((t for t in triplets if (t.type_a, t.predicate, t.type_b) == (kind, predicate, ref_type)), key=lambda t: t.id)
    others = sorted((t for t in triplets if t.type_a == kind), key=lambda t: t.id)
    out = []
    for t in same[:k]:
        ref = corpus[t.object_id]
        query = render_task2_query(predicate, geom_text(ref), kind)
        bad = None
        if negative:
            for o in others:
                s = corpus[o.subject_id]
                if s.id != t.subject_id and classify(s.geometry, ref.geometry, check=False) is not predicate:
                    bad = geom_text(s)
                    break
        out.append(Task2Example(query, geom_text(corpus[t.subject_id]), bad))
    return out


@dataclass
class Task2Run:
    mode: str
    gen_style: Optional[str]
    llm: str
    embedder: str
    ranks: list[RankResult]
    generations: list[GenerationRecord] = field(default_factory=list)

    @property
    def target(self) -> str:
        return "Object" if self.mode.startswith("object") else "Subject"

    def metrics(self) -> dict:
        m = {"mode": self.mode, "target": self.target, "retrieval": mrr_hits([r.rank for r in self.ranks])}
        if self.generations:
            m["generation"] = generation_metrics(self.generations)
        return m


def _filter_ids(q: Task2Query, corpus: Mapping[str, SpatialEntity], index: SpatialIndex, cache: dict) -> set[str]:
    """Candidates other than the target that hold the query relation with
    the reference (the filtered setting)."""
    ref = corpus[q.reference_id]
    rel = _target_relation(q)
    key = (q.reference_id, rel)
    if key not in cache:
        hits = set()
        for i in index.query(ref.geometry.bounds):
            c = index.entities[i]
            if classify(c.geometry, ref.geometry, check=False) is rel:
                hits.add(c.id)
        cache[key] = hits
    return cache[key] - {q.target_id}


def run_task2(
    triplets: Sequence[RelationTriplet],
    corpus: Mapping[str, SpatialEntity],
    embedder: EmbeddingClient,
    mode: str = "typed",
    chat: Optional[ChatClient] = None,
    gen_style: str = "zero",
    n_generate: Optional[int] = None,
    examples_from: Sequence[RelationTriplet] = (),
    fusion: str = "concat",
    temperature: float = 0.7,
    templates: Optional[TemplateSet] = None,
    max_concurrency: Optional[int] = None,
) -> Task2Run:
    """Retrieve each query's target among all retrieval-corpus entities.

    Expanded modes first ask ``chat`` for synthetic geometries holding the
    relation with the reference; valid ones are appended to the typed
    query (``fusion="concat"``) or averaged with it in embedding space
    (``fusion="mean"``)."""
    queries = task2_queries(triplets, mode)
    if n_generate is None:
        n_generate = {"expanded_1": 1, "expanded_3": 3}.get(mode, 0)
    if n_generate and chat is None:
        raise ValueError(f"mode {mode!r} needs a chat backend for geometry generation")
    cand_ids = sorted({t.subject_id for t in triplets} | {t.object_id for t in triplets})
    cands = [corpus[c] for c in cand_ids]
    cand_vecs = embedder.embed_batch([geom_text(e) for e in cands]) if cands else np.zeros((0, 1))
    index = SpatialIndex(cands)

    generations: list[GenerationRecord] = []
    expansions: dict[str, list[str]] = defaultdict(list)
    if n_generate:
        jobs = []
        for q in queries:
            ref = corpus[q.reference_id]
            rel = _target_relation(q)
            ex = ()
            if gen_style.startswith("few"):
                ex = generation_examples(examples_from, corpus, q.target_type, q.reference_type, rel, negative=gen_style == "few_negative")
            prompt = render_task2_generation(rel, geom_text(ref), q.target_type, gen_style, ex, templates)
            for s in range(n_generate):
                jobs.append((q, ref, rel, prompt, s))

        def gen(job) -> GenerationRecord:
            q, ref, rel, prompt, s = job
            try:
                text = chat.chat(prompt, sample_index=s, temperature=temperature)
            except AuthError:
                raise
            except BackendError as exc:
                return GenerationRecord(q.id, s, prompt, "", q.target_type, rel.value, error=f"backend: {exc}")
            return judge_generation(q.id, s, prompt, text, ref, q.target_type, rel)

        generations = map_ordered(gen, jobs, max_concurrency or chat.max_concurrency)
        for g in generations:
            if g.valid_wkt:
                expansions[g.query_id].append(g.wkt)

    texts, extra = [], []
    for q in queries:
        ref = corpus[q.reference_id]
        if mode == "direct":
            texts.append(render_task2_query(q.predicate, geom_text(ref)))
        elif mode == "object_original":
            texts.append(render_task2_object_query(q.predicate, geom_text(ref), q.target_type))
        else:
            exp = expansions[q.id] if fusion == "concat" else []
            texts.append(render_task2_query(_target_relation(q), geom_text(ref), q.target_type, exp))
        if fusion == "mean":
            extra.append(expansions[q.id])
    qvecs = embedder.embed_batch(texts) if texts else np.zeros((0, 1))
    if fusion == "mean":
        fused = []
        for v, exp in zip(qvecs, extra):
            parts = [v / np.linalg.norm(v)]
            if exp:
                parts += [u / np.linalg.norm(u) for u in embedder.embed_batch(exp)]
            fused.append(np.mean(parts, axis=0))
        qvecs = np.asarray(fused)
    elif fusion != "concat":
        raise ValueError(f"unknown fusion {fusion!r}")

    cache: dict = {}
    ranks = [
        rank_candidates(v, cand_vecs, cand_ids, q.target_id, _filter_ids(q, corpus, index, cache), q.id)
        for q, v in zip(queries, qvecs)
    ]
    return Task2Run(mode, gen_style if n_generate else None, chat.model if (chat and n_generate) else "", embedder.model, ranks, generations)


# --------------------------------------------------------------------------
# task 3


@dataclass
class Task3Answer:
    sample_index: int
    response: str
    predicate: Optional[str]
    candidates: tuple[str, ...]
    error: Optional[str] = None


@dataclass
class Task3Result:
    pair: ConversionPair
    with_context: bool
    prompt: str
    answers: list[Task3Answer]

    def metrics(self) -> dict:
        return task3_metrics([a.candidates for a in self.answers if a.error is None], self.pair.predicate)

    def to_dict(self) -> dict:
        return {
            "pair": self.pair.to_dict(),
            "with_context": self.with_context,
            "prompt": self.prompt,
            "answers": [a.__dict__ | {"candidates": list(a.candidates)} for a in self.answers],
            "metrics": self.metrics(),
        }


def task3_metrics(runs: Sequence[Sequence[str]], truth) -> dict:
    """Frequency (runs mentioning the truth), accuracy (share of all
    mentions that are the truth) and natural-log entropy of the mention
    distribution."""
    truth = Predicate(truth).value
    mentions = Counter(p for run in runs for p in dict.fromkeys(run))
    total = sum(mentions.values())
    freq = sum(1 for run in runs if truth in run)
    acc = mentions[truth] / total if total else 0.0
    h = -sum((c / total) * math.log(c / total) for c in mentions.values()) if total else 0.0
    return {
        "runs": len(runs),
        "frequency": freq,
        "accuracy": acc,
        "entropy": h + 0.0,
        "mentions": {p: mentions[p] for p in PREDICATE_NAMES if mentions[p]},
    }


def run_task3(
    pairs: Sequence[ConversionPair],
    client: ChatClient,
    repetitions: int = 10,
    with_context: bool = True,
    temperature: Optional[float] = None,
    templates: Optional[TemplateSet] = None,
    max_concurrency: Optional[int] = None,
) -> list[Task3Result]:
    """``repetitions`` independent samples of each conversion prompt."""
    pairs = sorted(pairs, key=lambda p: p.id)
    prompts = []
    for p in pairs:
        if with_context and p.context_kind != "none":
            prompts.append(render_task3(p.description, p.context_kind, p.context, templates))
        else:
            prompts.append(render_task3(p.description, templates=templates))
    jobs = [(i, s) for i in range(len(pairs)) for s in range(repetitions)]

    def one(job) -> Task3Answer:
        i, s = job
        try:
            text = client.chat(prompts[i], sample_index=s, temperature=temperature)
        except AuthError:
            raise
        except BackendError as exc:
            return Task3Answer(s, "", None, (), str(exc))
        parsed = parse_task3_answer(text)
        return Task3Answer(s, text, parsed.predicate, parsed.candidates)

    answers = map_ordered(one, jobs, max_concurrency or client.max_concurrency)
    out = []
    for i, p in enumerate(pairs):
        out.append(Task3Result(p, with_context and p.context_kind != "none", prompts[i], answers[i * repetitions : (i + 1) * repetitions]))
    return out


# --------------------------------------------------------------------------
# reports


def _fmt(v) -> str:
    if v is None:
        return "N/A"
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.3f}"
    return str(v)


def markdown_table(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    for r in rows:
        lines.append("| " + " | ".join(_fmt(v) for v in r) + " |")
    return "\n".join(lines) + "\n"


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


@dataclass
class Task1Run:
    approach: str
    llm: str
    prompt: str
    records: list[EvalRecord]

    @property
    def label(self) -> str:
        return f"{self.approach}|{self.llm}|{self.prompt}"

    def metrics(self) -> dict:
        return task1_metrics(self.records)


@dataclass
class Task3Run:
    llm: str
    with_context: list[Task3Result]
    without_context: list[Task3Result]


def _slug(s: str) -> str:
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in s)


def report(results: Sequence, out_dir: Union[str, Path], formats: Sequence[str] = ("json", "markdown", "csv")) -> list[Path]:
    """Write metrics.json, records.jsonl, Markdown tables and confusion
    CSVs for a list of run objects of one or more tasks."""
    out = Path(out_dir)
    written: list[Path] = []

    def put(rel: str, text: str) -> None:
        p = out / rel
        _atomic_write(p, text)
        written.append(p)

    t1 = [r for r in results if isinstance(r, Task1Run)]
    t2 = [r for r in results if isinstance(r, Task2Run)]
    t3 = [r for r in results if isinstance(r, Task3Run)]
    if not (t1 or t2 or t3):
        t1 = []
    metrics: dict = {}
    records: list[str] = []

    if t1 or not (t2 or t3):
        rows_v, rows_c = [], []
        metrics["task1"] = []
        for r in t1:
            m = r.metrics()
            metrics["task1"].append({"approach": r.approach, "llm": r.llm, "prompt": r.prompt, "metrics": m})
            rows_v.append((r.approach, r.llm, r.prompt, m["format_validity"], m["geometry_type_validity"], m["predicate_validity"]))
            rows_c.append((r.approach, r.llm, r.prompt, m["accuracy"], m["dist_incorrect"]))
            for rec in sorted(r.records, key=lambda x: x.item_id):
                records.append(json.dumps({"run": r.label, **rec.to_dict()}, sort_keys=True, ensure_ascii=False))
            if "csv" in formats:
                put(f"confusion/{_slug(r.label)}__all.csv", confusion(r.records).to_csv())
                for ta in SIMPLE_TYPES:
                    for tb in SIMPLE_TYPES:
                        put(f"confusion/{_slug(r.label)}__{ta}_{tb}.csv", confusion(r.records, (ta, tb)).to_csv())
        if "markdown" in formats:
            put("tables/task1_validity.md", markdown_table(["Approach", "LLM", "Prompt", "Format", "Geometry type", "Predicate"], rows_v))
            put("tables/task1_classification.md", markdown_table(["Approach", "LLM", "Prompt", "Accuracy", "Dist(Incorrect)"], rows_c))

    if t2:
        rows_r, rows_g = [], []
        metrics["task2"] = []
        for r in t2:
            m = r.metrics()
            metrics["task2"].append({"llm": r.llm, "embedder": r.embedder, "gen_style": r.gen_style, **m})
            ret = m["retrieval"]
            if r.ranks:
                rows_r.append((r.target, r.mode, ret["mrr"], ret["hits@5"], ret["hits@10"], ret["hits@20"]))
            if "generation" in m:
                g = m["generation"]
                rows_g.append((r.gen_style, r.mode, g["valid_wkt"], g["geometry_type"], g["predicate"], g["topological_distance"]))
            for rr in r.ranks:
                records.append(json.dumps({"run": f"task2|{r.mode}", **rr.to_dict()}, sort_keys=True))
            for gr in r.generations:
                records.append(json.dumps({"run": f"task2-gen|{r.mode}", **gr.to_dict()}, sort_keys=True, ensure_ascii=False))
        if "markdown" in formats:
            put("tables/task2_retrieval.md", markdown_table(["Target", "Query Format", "MRR", "Hits@5", "Hits@10", "Hits@20"], rows_r))
            put("tables/task2_generation.md", markdown_table(["Prompt", "Query Format", "Valid_WKT", "Geometry Type", "Predicate", "Topological Distance"], rows_g))

    if t3:
        metrics["task3"] = []
        tables: dict[str, list] = {k: [] for k in ("none", "place_type", "geometry_type", "place_name")}
        for r in t3:
            without = {x.pair.id: x for x in r.without_context}
            seen = set()
            for res in r.with_context + [x for x in r.without_context if x.pair.context_kind == "none"]:
                if res.pair.id in seen:
                    continue
                seen.add(res.pair.id)
                m = res.metrics()
                p = res.pair
                entry = {"llm": r.llm, "pair": p.to_dict(), "with_context": m}
                ctx = "/".join(p.context) if p.context else "N/A"
                if p.context_kind == "none":
                    tables["none"].append((p.description, p.predicate.value, m["frequency"], m["accuracy"], m["entropy"]))
                else:
                    wo = without.get(p.id)
                    mw = wo.metrics() if wo else None
                    entry["without_context"] = mw
                    tables[p.context_kind].append((
                        p.description, p.predicate.value, ctx, m["frequency"], m["accuracy"],
                        mw["accuracy"] if mw else None, m["entropy"], mw["entropy"] if mw else None,
                    ))
                metrics["task3"].append(entry)
            for res in r.with_context + r.without_context:
                records.append(json.dumps({"run": f"task3|{r.llm}", **res.to_dict()}, sort_keys=True, ensure_ascii=False))
        if "markdown" in formats:
            put("tables/task3_invariant.md", markdown_table(["Description", "Predicate", "Frequency", "Accuracy", "Entropy"], tables["none"]))
            head = ["Description", "Predicate", "Spatial Context", "Frequency", "Accuracy", "Accuracy without Context", "Entropy", "Entropy without Context"]
            for kind in ("place_type", "geometry_type", "place_name"):
                put(f"tables/task3_{kind}.md", markdown_table(head, tables[kind]))

    if "json" in formats:
        put("metrics.json", _dump(metrics))
        put("records.jsonl", "".join(r + "\n" for r in records))
    return written


# --------------------------------------------------------------------------
# run persistence, so report commands can merge earlier runs


def runs_to_json(runs: Sequence) -> str:
    out = []
    for r in runs:
        if isinstance(r, Task1Run):
            out.append({"task": 1, "approach": r.approach, "llm": r.llm, "prompt": r.prompt, "records": [x.to_dict() for x in r.records]})
        elif isinstance(r, Task2Run):
            out.append({
                "task": 2, "mode": r.mode, "gen_style": r.gen_style, "llm": r.llm, "embedder": r.embedder,
                "ranks": [{"query_id": x.query_id, "ranked": list(x.ranked), "rank": x.rank} for x in r.ranks],
                "generations": [g.to_dict() for g in r.generations],
            })
        elif isinstance(r, Task3Run):
            out.append({
                "task": 3, "llm": r.llm,
                "with_context": [x.to_dict() for x in r.with_context],
                "without_context": [x.to_dict() for x in r.without_context],
            })
    return _dump(out)


def _t3_from(d: dict) -> Task3Result:
    answers = [Task3Answer(a["sample_index"], a["response"], a["predicate"], tuple(a["candidates"]), a.get("error")) for a in d["answers"]]
    return Task3Result(ConversionPair.from_dict(d["pair"]), d["with_context"], d["prompt"], answers)


def runs_from_json(text: str) -> list:
    runs: list = []
    for d in json.loads(text):
        if d["task"] == 1:
            recs = []
            for x in d["records"]:
                x = dict(x)
                x["truth"] = tuple(x["truth"])
                recs.append(EvalRecord(**x))
            runs.append(Task1Run(d["approach"], d["llm"], d["prompt"], recs))
        elif d["task"] == 2:
            ranks = [RankResult(x["query_id"], tuple(x["ranked"]), x["rank"]) for x in d["ranks"]]
            gens = [GenerationRecord(**g) for g in d["generations"]]
            runs.append(Task2Run(d["mode"], d["gen_style"], d["llm"], d["embedder"], ranks, gens))
        elif d["task"] == 3:
            runs.append(Task3Run(d["llm"], [_t3_from(x) for x in d["with_context"]], [_t3_from(x) for x in d["without_context"]]))
    return runs
