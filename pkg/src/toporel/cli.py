"""``toporel`` command-line interface.

Exit codes: 0 success, 1 a run finished with item errors (or verification
found problems), 2 input error, 3 configuration or authentication error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .dataset import (
    CountError,
    DatasetError,
    IngestReport,
    ShortfallError,
    build_conversion_pairs,
    ingest,
    read_entities,
    read_pairs,
    read_triplets,
    read_vernacular,
    retrieval_corpus,
    sample_triplets,
    split,
    verify_triplets,
    write_entities,
    write_pairs,
    write_triplets,
)
from .llm import (
    AuthError,
    BackendConfig,
    BackendError,
    CacheCorruption,
    ChatClient,
    ConfigError,
    EmbeddingClient,
    HashEmbedder,
    ResponseCache,
    TranscriptChat,
    http_chat_backend,
    http_embed_backend,
)
from .neighborhood import NotApplicable, load_graphs, topological_distance
from .prompts import TASK1_STYLES, TASK2_STYLES, TemplateSet
from .topology import classify, relate
from .wkt import ParseError, parse_wkt

EXIT_OK, EXIT_ITEMS, EXIT_INPUT, EXIT_CONFIG = 0, 1, 2, 3


class InputError(ValueError):
    pass


# --------------------------------------------------------------------------
# helpers


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def read_config(path: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment; dashes in keys are
    read as underscores."""
    out = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    for n, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def _config(args) -> BackendConfig:
    values = {k: getattr(args, k, None) for k in BackendConfig.__dataclass_fields__}
    return BackendConfig.from_mapping(values)


def _cache(cfg: BackendConfig) -> Optional[ResponseCache]:
    return ResponseCache(cfg.cache_dir) if cfg.cache_dir else None


def _chat_client(args, cfg: BackendConfig, temperature: Optional[float] = None) -> ChatClient:
    kind = args.backend
    if kind == "mock":
        from .mock import GeometryAwareMock

        table = None
        if args.mock_task3:
            table = json.loads(Path(args.mock_task3).read_text(encoding="utf-8"))
        backend = GeometryAwareMock(args.mock_error or (), table)
    elif kind == "transcript":
        if not args.transcript:
            raise ConfigError("--backend transcript needs --transcript FILE")
        backend = TranscriptChat.load(args.transcript)
    else:
        backend = http_chat_backend(cfg)
    temp = cfg.temperature if temperature is None else temperature
    return ChatClient(backend, _cache(cfg), temp, cfg.max_concurrency)


def _embed_client(args, cfg: BackendConfig) -> EmbeddingClient:
    if args.embedder == "hash":
        return EmbeddingClient(HashEmbedder(args.embed_dim), _cache(cfg))
    return EmbeddingClient(http_embed_backend(cfg), _cache(cfg))


def _templates(args) -> Optional[TemplateSet]:
    return TemplateSet.load(args.template_dir) if getattr(args, "template_dir", None) else None


def _load_data(data_dir: str):
    d = Path(data_dir)
    ent, tri = d / "entities.jsonl", d / "triplets.jsonl"
    for p in (ent, tri):
        if not p.exists():
            raise InputError(f"missing {p}")
    report = IngestReport()
    corpus = ingest(ent, "jsonl", report)
    if report.rejected:
        raise InputError(f"{len(report.rejected)} invalid entities in {ent}: {report.rejected[0]}")
    return corpus, read_triplets(tri), {str(ent): _sha256(ent), str(tri): _sha256(tri)}


def _write_manifest(out_dir: Path, argv: Sequence[str], args, cfg: Optional[BackendConfig], hashes: dict, models: dict, started: float, templates: Optional[TemplateSet] = None) -> None:
    from .prompts import default_templates

    manifest = {
        "tool": f"toporel {__version__}",
        "command": list(argv),
        "config": cfg.snapshot() if cfg else {},
        "options": {k: v for k, v in sorted(vars(args).items()) if k not in ("func",) and _jsonable(v)},
        "dataset_hashes": hashes,
        "template_hash": (templates or default_templates()).hash,
        "models": models,
        "seeds": {"seed": getattr(args, "seed", None)},
        "timestamps": {
            "started": datetime.fromtimestamp(started, timezone.utc).isoformat(),
            "finished": datetime.now(timezone.utc).isoformat(),
        },
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _jsonable(v) -> bool:
    try:
        json.dumps(v)
        return True
    except TypeError:
        return False


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


# --------------------------------------------------------------------------
# commands


def cmd_relate(args) -> int:
    a, b = parse_wkt(args.wkt_a), parse_wkt(args.wkt_b)
    m = relate(a, b)
    print(f"{m} {classify(a, b).value}")
    return EXIT_OK


def cmd_distance(args) -> int:
    graphs = load_graphs(args.graphs) if args.graphs else None
    try:
        print(topological_distance((args.type_a, args.type_b), args.r1, args.r2, graphs))
    except NotApplicable as exc:
        raise InputError(str(exc)) from None
    return EXIT_OK


def cmd_dataset_synth(args) -> int:
    import csv

    from .synthetic import synthetic_corpus
    from .wkt import to_wkt

    corpus = synthetic_corpus(args.cells, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "wkt", "name", "place_type"])
        for e in corpus.values():
            w.writerow([e.id, to_wkt(e.geometry, None), e.name or "", e.place_type or ""])
    _say(f"wrote {len(corpus)} entities to {out}")
    return EXIT_OK


def cmd_dataset_generate(args, argv) -> int:
    started = time.time()
    report = IngestReport()
    corpus = ingest(args.corpus, args.format, report)
    _say(f"ingested {report.accepted} entities, rejected {len(report.rejected)}")
    for rid, why in report.rejected[:10]:
        _say(f"  rejected {rid}: {why}")
    try:
        sample = sample_triplets(corpus, args.per_combo, args.seed, args.fewshot, args.buffer, progress=_say if args.verbose else None)
    except ShortfallError as exc:
        for (ta, p, tb), n in exc.shortfall.items():
            _say(f"shortfall {ta}/{p.value}/{tb}: {n} of {args.per_combo + args.fewshot}")
        raise InputError("corpus too small for the requested triplet counts") from None
    out = Path(args.out)
    entities = {**corpus, **sample.entities}
    triplets = sample.triplets
    if args.split:
        sizes = {"train": args.per_combo - args.eval_size, "eval": args.eval_size, "fewshot": args.fewshot}
        triplets = split(triplets, args.seed, sizes)
    write_entities(out / "entities.jsonl", entities.values())
    write_triplets(out / "triplets.jsonl", triplets)
    if args.split:
        write_triplets(out / "retrieval.jsonl", retrieval_corpus(triplets))
    counts = sample.counts()
    summary = {
        "combinations": len(counts),
        "triplets": len(triplets),
        "per_combination": {f"{a}/{p.value}/{b}": n for (a, p, b), n in counts.items()},
        "entities": len(entities),
        "synthesized": len(sample.entities),
        "rejected": report.counts,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _write_manifest(out, argv, args, None, {str(args.corpus): _sha256(Path(args.corpus))}, {}, started)
    print(f"{summary['combinations']} combinations, {summary['triplets']} triplets -> {out}")
    return EXIT_OK


def cmd_dataset_split(args) -> int:
    triplets = read_triplets(args.triplets)
    sizes = {"train": args.train, "eval": args.eval_size, "fewshot": args.fewshot}
    tagged = split(triplets, args.seed, sizes)
    write_triplets(args.out, tagged)
    if args.retrieval:
        write_triplets(args.retrieval, retrieval_corpus(tagged))
    print(f"split {len(tagged)} triplets -> {args.out}")
    return EXIT_OK


def cmd_dataset_verify(args) -> int:
    corpus = read_entities(args.entities)
    triplets = read_triplets(args.triplets)
    problems = verify_triplets(triplets, corpus)
    for p in problems:
        print(p)
    print(f"{len(triplets)} triplets checked, {len(problems)} problem(s)")
    return EXIT_ITEMS if problems else EXIT_OK


def _split_of(triplets, name):
    return [t for t in triplets if t.split == name]


def cmd_task1_run(args, argv) -> int:
    from .evaluation import Task1Run, report, run_task1, runs_to_json, task1_examples, task1_items

    started = time.time()
    cfg = _config(args)
    corpus, triplets, hashes = _load_data(args.data)
    items = task1_items(_split_of(triplets, args.split), corpus)
    if args.limit:
        items = items[: args.limit]
    pool = task1_examples(_split_of(triplets, "fewshot"), corpus)
    client = _chat_client(args, cfg)
    templates = _templates(args)
    runs = []
    for style in args.style or ["zero"]:
        recs = run_task1(items, client, style, pool, args.k, args.seed, templates)
        runs.append(Task1Run("Question answering", client.model, style, recs))
    out = Path(args.out_dir)
    report(runs, out)
    (out / "runs.json").write_text(runs_to_json(runs), encoding="utf-8")
    _write_manifest(out, argv, args, cfg, hashes, {"chat": client.model}, started, templates)
    errors = sum(r.error is not None for run in runs for r in run.records)
    for run in runs:
        m = run.metrics()
        print(f"{run.prompt}: accuracy={m['accuracy']} format={m['format_validity']} dist_incorrect={m['dist_incorrect']}")
    return EXIT_ITEMS if errors else EXIT_OK


def _merge_report(args, argv) -> int:
    from .evaluation import report, runs_from_json, runs_to_json

    started = time.time()
    runs = []
    hashes = {}
    for d in args.run_dir:
        p = Path(d) / "runs.json"
        if not p.exists():
            raise InputError(f"missing {p}")
        runs.extend(runs_from_json(p.read_text(encoding="utf-8")))
        hashes[str(p)] = _sha256(p)
    out = Path(args.out_dir)
    report(runs, out)
    (out / "runs.json").write_text(runs_to_json(runs), encoding="utf-8")
    _write_manifest(out, argv, args, None, hashes, {}, started)
    print(f"report for {len(runs)} run(s) -> {out}")
    return EXIT_OK


def cmd_task2(args, argv) -> int:
    from .evaluation import Task2Run, report, run_task2, runs_to_json, task2_queries

    started = time.time()
    cfg = _config(args)
    corpus, triplets, hashes = _load_data(args.data)
    queries = retrieval_corpus(triplets)
    if args.limit:
        queries = queries[: args.limit]
    fewshot = _split_of(triplets, "fewshot")
    templates = _templates(args)
    chat = None
    if args.command2 == "generate" or any(m.startswith("expanded") for m in (args.mode or [])):
        chat = _chat_client(args, cfg, args.gen_temperature)
    embedder = _embed_client(args, cfg) if args.command2 == "retrieve" else None
    runs = []
    if args.command2 == "generate":
        from .evaluation import judge_generation, generation_examples, geom_text, _target_relation
        from .llm import map_ordered
        from .prompts import render_task2_generation

        qs = task2_queries(queries, "typed")
        jobs = []
        for q in qs:
            rel = _target_relation(q)
            ex = ()
            if args.gen_style.startswith("few"):
                ex = generation_examples(fewshot, corpus, q.target_type, q.reference_type, rel, negative=args.gen_style == "few_negative")
            prompt = render_task2_generation(rel, geom_text(corpus[q.reference_id]), q.target_type, args.gen_style, ex, templates)
            jobs.extend((q, rel, prompt, s) for s in range(args.samples))

        def gen(job):
            q, rel, prompt, s = job
            try:
                text = chat.chat(prompt, sample_index=s)
            except AuthError:
                raise
            except BackendError as exc:
                from .evaluation import GenerationRecord

                return GenerationRecord(q.id, s, prompt, "", q.target_type, rel.value, error=f"backend: {exc}")
            return judge_generation(q.id, s, prompt, text, corpus[q.reference_id], q.target_type, rel)

        gens = map_ordered(gen, jobs, cfg.max_concurrency)
        runs.append(Task2Run("generation", args.gen_style, chat.model, "", [], gens))
    else:
        for mode in args.mode or ["typed"]:
            runs.append(
                run_task2(queries, corpus, embedder, mode, chat, args.gen_style, None, fewshot, args.fusion, args.gen_temperature, templates)
            )
    out = Path(args.out_dir)
    report(runs, out)
    (out / "runs.json").write_text(runs_to_json(runs), encoding="utf-8")
    models = {"chat": chat.model if chat else None, "embed": embedder.model if embedder else None}
    _write_manifest(out, argv, args, cfg, hashes, models, started, templates)
    errors = sum(1 for r in runs for g in r.generations if (g.error or "").startswith("backend:"))
    for r in runs:
        print(json.dumps(r.metrics(), sort_keys=True))
    return EXIT_ITEMS if errors else EXIT_OK


def cmd_task3_pairs(args) -> int:
    records = read_vernacular(args.records)
    pairs = build_conversion_pairs(records, args.seed, args.min_support)
    write_pairs(args.out, pairs)
    print(f"{len(pairs)} conversion pairs from {len(records)} records -> {args.out}")
    return EXIT_OK


def cmd_task3_run(args, argv) -> int:
    from .evaluation import Task3Run, report, run_task3, runs_to_json

    started = time.time()
    cfg = _config(args)
    pairs = read_pairs(args.pairs)
    client = _chat_client(args, cfg, args.task3_temperature)
    templates = _templates(args)
    with_ctx = run_task3(pairs, client, args.repetitions, True, templates=templates)
    conditioned = [p for p in pairs if p.context_kind != "none"]
    without = run_task3(conditioned, client, args.repetitions, False, templates=templates)
    run = Task3Run(client.model, with_ctx, without)
    out = Path(args.out_dir)
    report([run], out)
    (out / "runs.json").write_text(runs_to_json([run]), encoding="utf-8")
    _write_manifest(out, argv, args, cfg, {str(args.pairs): _sha256(Path(args.pairs))}, {"chat": client.model}, started, templates)
    errors = sum(a.error is not None for r in with_ctx + without for a in r.answers)
    print(f"{len(pairs)} pairs x {args.repetitions} repetitions -> {out}")
    return EXIT_ITEMS if errors else EXIT_OK


def cmd_classifier_train(args, argv) -> int:
    import numpy as np

    from .classifier import save, train
    from .evaluation import geom_text

    started = time.time()
    cfg = _config(args)
    corpus, triplets, hashes = _load_data(args.data)
    rows = _split_of(triplets, "train")
    if args.limit:
        rows = rows[: args.limit]
    emb = _embed_client(args, cfg)
    X = _pair_features(emb, corpus, rows)
    model = train(X, [t.combo for t in rows], args.estimators, args.seed, args.max_features, args.min_samples_split, args.max_depth)
    out = Path(args.model)
    out.parent.mkdir(parents=True, exist_ok=True)
    save(model, out)
    print(f"trained {len(model.trees)} trees on {len(rows)} triplets ({X.shape[1]} features) -> {out}")
    return EXIT_OK


def _pair_features(emb, corpus, triplets):
    import numpy as np

    from .evaluation import geom_text

    a = emb.embed_batch([geom_text(corpus[t.subject_id]) for t in triplets])
    b = emb.embed_batch([geom_text(corpus[t.object_id]) for t in triplets])
    return np.concatenate([a, b], axis=1)


def cmd_classifier_eval(args, argv) -> int:
    from .classifier import load
    from .evaluation import Task1Run, classifier_records, report, runs_to_json, task1_items

    started = time.time()
    cfg = _config(args)
    corpus, triplets, hashes = _load_data(args.data)
    rows = sorted(_split_of(triplets, args.split), key=lambda t: t.id)
    if args.limit:
        rows = rows[: args.limit]
    model = load(args.model)
    emb = _embed_client(args, cfg)
    preds = model.predict_many(_pair_features(emb, corpus, rows))
    items = task1_items(rows, corpus)
    by_id = {t.id: p for t, p in zip(rows, preds)}
    recs = classifier_records(items, [by_id[i.id] for i in items])
    run = Task1Run("Random Forest", emb.model, "N/A", recs)
    out = Path(args.out_dir)
    report([run], out)
    (out / "runs.json").write_text(runs_to_json([run]), encoding="utf-8")
    hashes[str(args.model)] = _sha256(Path(args.model))
    _write_manifest(out, argv, args, cfg, hashes, {"embed": emb.model}, started)
    m = run.metrics()
    print(f"accuracy={m['accuracy']} dist_incorrect={m['dist_incorrect']}")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _backend_flags(p: argparse.ArgumentParser, embed: bool = False, chat: bool = True) -> None:
    g = p.add_argument_group("backend")
    if chat:
        g.add_argument("--backend", choices=("http", "mock", "transcript"), default="http", help="chat backend (default: http)")
        g.add_argument("--mock-error", action="append", metavar="RULE", help="mock error rule truth->predicted[@TypeA/TypeB][:rate]; repeatable")
        g.add_argument("--mock-task3", metavar="FILE", help="JSON table description -> list of scripted answers for the mock")
        g.add_argument("--transcript", metavar="FILE", help="JSONL {prompt_sha256, response} for --backend transcript")
        g.add_argument("--template-dir", metavar="DIR", help="override prompt templates")
    if embed:
        g.add_argument("--embedder", choices=("http", "hash"), default="http", help="embedding backend (default: http)")
        g.add_argument("--embed-dim", type=int, default=256, help="dimension of the hash embedder")
    g.add_argument("--base-url", help="OpenAI-compatible service URL")
    g.add_argument("--api-key-env", help="environment variable holding the API key")
    g.add_argument("--chat-model", help="chat model id")
    g.add_argument("--embed-model", help="embedding model id")
    g.add_argument("--temperature", type=float, help="sampling temperature")
    g.add_argument("--max-tokens", type=int, help="max output tokens")
    g.add_argument("--timeout", type=float, help="request timeout in seconds")
    g.add_argument("--max-retries", type=int, help="retries on transient failures")
    g.add_argument("--cache-dir", help="response cache directory")
    g.add_argument("--max-concurrency", type=int, help="parallel requests (default 4)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="toporel", description="Topological relations between geometries and LLM evaluation harness.")
    ap.add_argument("--version", action="version", version=f"toporel {__version__}")
    ap.add_argument("--config", metavar="FILE", help="key = value defaults; command-line flags win")
    ap.add_argument("--precision", type=int, default=6, help="coordinate decimals in prompts and embedded text (-1: exact)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("relate", help="print the DE-9IM matrix and predicate of two WKT geometries")
    p.add_argument("wkt_a")
    p.add_argument("wkt_b")
    p.set_defaults(func=lambda a, argv: cmd_relate(a))

    p = sub.add_parser("neighborhood-distance", help="conceptual-neighborhood distance between two predicates")
    p.add_argument("type_a")
    p.add_argument("type_b")
    p.add_argument("r1")
    p.add_argument("r2")
    p.add_argument("--graphs", metavar="FILE", help="neighborhood graph JSON (default: shipped graphs)")
    p.set_defaults(func=lambda a, argv: cmd_distance(a))

    ds = sub.add_parser("dataset", help="build, split and verify triplet datasets").add_subparsers(dest="command2", required=True)
    p = ds.add_parser("synth", help="write a synthetic wkt-csv corpus")
    p.add_argument("--cells", type=int, default=240)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=lambda a, argv: cmd_dataset_synth(a))
    p = ds.add_parser("generate", help="sample verified triplets for every combination")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=("wkt-csv", "jsonl", "geojson"), default="wkt-csv")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--per-combo", type=int, default=200)
    p.add_argument("--fewshot", type=int, default=25)
    p.add_argument("--eval-size", type=int, default=40)
    p.add_argument("--buffer", type=float, default=0.001, help="disjoint-sampling buffer in coordinate units")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-split", dest="split", action="store_false", help="skip train/eval/fewshot tagging")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_dataset_generate)
    p = ds.add_parser("split", help="tag triplets train/eval/fewshot")
    p.add_argument("--triplets", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--retrieval", help="also write the retrieval corpus here")
    p.add_argument("--train", type=int, default=160)
    p.add_argument("--eval-size", type=int, default=40)
    p.add_argument("--fewshot", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=lambda a, argv: cmd_dataset_split(a))
    p = ds.add_parser("verify", help="re-derive every triplet from its geometries")
    p.add_argument("--triplets", required=True)
    p.add_argument("--entities", required=True)
    p.set_defaults(func=lambda a, argv: cmd_dataset_verify(a))

    t1 = sub.add_parser("task1", help="relation qualification").add_subparsers(dest="command2", required=True)
    p = t1.add_parser("run", help="ask a chat backend for the relation of each eval triplet")
    p.add_argument("--data", required=True, help="directory with entities.jsonl and triplets.jsonl")
    p.add_argument("--style", action="append", choices=TASK1_STYLES, help="prompt style; repeatable (default zero)")
    p.add_argument("--split", default="eval")
    p.add_argument("--k", type=int, help="few-shot examples per prompt (default: one per applicable predicate)")
    p.add_argument("--limit", type=int, help="only the first N items")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    _backend_flags(p)
    p.set_defaults(func=cmd_task1_run)
    p = t1.add_parser("report", help="merge run directories into one report")
    p.add_argument("--run-dir", action="append", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_merge_report)

    t2 = sub.add_parser("task2", help="spatial query processing").add_subparsers(dest="command2", required=True)
    for name, hlp in (("generate", "generate geometries for retrieval queries and score their validity"), ("retrieve", "rank candidates for retrieval queries")):
        p = t2.add_parser(name, help=hlp)
        p.add_argument("--data", required=True)
        p.add_argument("--gen-style", choices=TASK2_STYLES, default="zero")
        p.add_argument("--gen-temperature", type=float, default=0.7)
        p.add_argument("--limit", type=int)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out-dir", required=True)
        if name == "generate":
            p.add_argument("--samples", type=int, default=1, help="generations per query")
            _backend_flags(p)
        else:
            from .evaluation import QUERY_MODES

            p.add_argument("--mode", action="append", choices=QUERY_MODES, help="query mode; repeatable (default typed)")
            p.add_argument("--fusion", choices=("concat", "mean"), default="concat", help="how generated geometries join the query")
            _backend_flags(p, embed=True)
        p.set_defaults(func=cmd_task2)
    p = t2.add_parser("report", help="merge run directories into one report")
    p.add_argument("--run-dir", action="append", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_merge_report)

    t3 = sub.add_parser("task3", help="vernacular relation conversion").add_subparsers(dest="command2", required=True)
    p = t3.add_parser("pairs", help="build conversion pairs from vernacular records")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--min-support", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=lambda a, argv: cmd_task3_pairs(a))
    p = t3.add_parser("run", help="repeatedly convert each pair with and without context")
    p.add_argument("--pairs", required=True)
    p.add_argument("--repetitions", type=int, default=10)
    p.add_argument("--task3-temperature", type=float, default=0.7)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    _backend_flags(p)
    p.set_defaults(func=cmd_task3_run)
    p = t3.add_parser("report", help="merge run directories into one report")
    p.add_argument("--run-dir", action="append", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_merge_report)

    cl = sub.add_parser("classifier", help="random-forest embedding baseline").add_subparsers(dest="command2", required=True)
    p = cl.add_parser("train")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True, help="output model file (JSON)")
    p.add_argument("--estimators", type=int, default=100)
    p.add_argument("--max-features", default="sqrt")
    p.add_argument("--min-samples-split", type=int, default=2)
    p.add_argument("--max-depth", type=int)
    p.add_argument("--limit", type=int)
    p.add_argument("--seed", type=int, default=0)
    _backend_flags(p, embed=True, chat=False)
    p.set_defaults(func=cmd_classifier_train)
    p = cl.add_parser("eval")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--split", default="eval")
    p.add_argument("--limit", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    _backend_flags(p, embed=True, chat=False)
    p.set_defaults(func=cmd_classifier_eval)
    return ap


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> dict:
    """Install config-file values as parser defaults; returns the
    list-valued ones, which the caller fills in after parsing."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    lists: dict = {}
    if not known.config:
        return lists
    values = read_config(known.config)
    stack = [parser]
    while stack:
        p = stack.pop()
        defaults = {}
        for a in p._actions:
            if a.dest not in values:
                continue
            v = values[a.dest]
            if isinstance(a, argparse._AppendAction):
                # applied after parsing, so flags replace rather than extend
                lists[a.dest] = [s.strip() for s in v.split(",") if s.strip()]
                continue
            elif a.nargs == 0:
                v = v.lower() in ("1", "true", "yes", "on")
            defaults[a.dest] = v
        p.set_defaults(**defaults)
        for a in p._actions:
            if isinstance(a, argparse._SubParsersAction):
                stack.extend(a.choices.values())
    return lists


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        lists = _apply_config(parser, argv)
        args = parser.parse_args(argv)
        for k, v in lists.items():
            if hasattr(args, k) and getattr(args, k) is None:
                setattr(args, k, v)
        if getattr(args, "max_features", None) not in (None, "sqrt"):
            args.max_features = int(args.max_features)
        from .evaluation import set_text_precision

        set_text_precision(None if args.precision < 0 else args.precision)
        return args.func(args, argv)
    except (AuthError, ConfigError) as exc:
        _say(f"error: {type(exc).__name__}: {exc}")
        return EXIT_CONFIG
    except (ParseError, InputError, CountError, DatasetError, FileNotFoundError, NotApplicable, CacheCorruption) as exc:
        _say(f"error: {type(exc).__name__}: {exc}")
        return EXIT_INPUT
    except BackendError as exc:
        _say(f"error: {type(exc).__name__}: {exc}")
        return EXIT_ITEMS
    except ValueError as exc:
        _say(f"error: {type(exc).__name__}: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
