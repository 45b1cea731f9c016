import json
import math

import numpy as np
import pytest

from toporel import Predicate, parse_wkt
from toporel.dataset import ConversionPair, RelationTriplet, SpatialEntity, sample_triplets, split
from toporel.evaluation import (
    EvalRecord,
    RankResult,
    Task1Run,
    Task2Run,
    Task3Run,
    confusion,
    geom_text,
    judge_generation,
    judge_task1,
    mrr_hits,
    rank_candidates,
    report,
    run_task1,
    run_task2,
    run_task3,
    runs_from_json,
    runs_to_json,
    task1_items,
    task1_metrics,
    task2_queries,
    task3_metrics,
)
from toporel.llm import BackendError, CallableChat, ChatClient, EmbeddingClient, HashEmbedder, TableEmbedder
from toporel.mock import GeometryAwareMock
from toporel.prompts import parse_task1_answer
from toporel.synthetic import synthetic_corpus

from fixtures import S

TRUTH = ("Point", "within", "Polygon")


def _rec(i, text, truth=TRUTH):
    return judge_task1(f"r{i:02d}", "zero", "", text, parse_task1_answer(text), truth)


@pytest.fixture(scope="module")
def small():
    corpus = synthetic_corpus(12)
    sample = sample_triplets(corpus, per_combo=5, fewshot=5, seed=0)
    tagged = split(sample.triplets, sizes={"train": 0, "eval": 5, "fewshot": 5}, seed=0)
    return {**corpus, **sample.entities}, tagged


# task 1 judging and metrics


def test_format_validity_nine_of_ten():
    recs = [_rec(i, "(Point, within, Polygon)") for i in range(9)] + [_rec(9, "no idea")]
    m = task1_metrics(recs)
    assert m["format_validity"] == 0.9
    assert m["accuracy"] == 1.0


def test_all_correct_has_empty_distance():
    m = task1_metrics([_rec(i, "(Point, within, Polygon)") for i in range(5)])
    assert m["accuracy"] == 1.0 and m["dist_incorrect"] is None and m["dist_incorrect_empty"]


def test_neighbor_error_distance_one():
    recs = [_rec(0, "(Point, within, Polygon)"), _rec(1, "(Point, touches, Polygon)")]
    m = task1_metrics(recs)
    assert m["accuracy"] == 0.5 and m["dist_incorrect"] == 1.0


def test_validity_chain():
    wrong_types = _rec(0, "(Polygon, within, Point)")
    bad_combo = _rec(1, "(Point, crosses, Polygon)")
    assert wrong_types.format_valid and not wrong_types.types_valid
    assert bad_combo.types_valid and not bad_combo.combo_valid
    m = task1_metrics([wrong_types, bad_combo, _rec(2, "(Point, within, Polygon)")])
    assert m["geometry_type_validity"] == pytest.approx(2 / 3)
    assert m["predicate_validity"] == 0.5


def test_outcomes_partition():
    texts = ["(Point, within, Polygon)", "(Point, touches, Polygon)", "(Point, crosses, Polygon)", "junk"]
    m = task1_metrics([_rec(i, t) for i, t in enumerate(texts)])
    assert m["accuracy_all"] + m["incorrect_rate"] + m["invalid_rate"] == pytest.approx(1.0)


def test_errored_items_excluded():
    err = EvalRecord("x", "task1", "zero", "", "", {}, TRUTH, error="backend down")
    m = task1_metrics([err, _rec(0, "(Point, within, Polygon)")])
    assert m["n"] == 1 and m["errors"] == 1 and m["format_validity"] == 1.0


def test_confusion_perfect_is_diagonal():
    recs = [_rec(i, f"(Point, {p}, Polygon)", ("Point", p, "Polygon")) for i, p in enumerate(["within", "touches", "disjoint"])]
    cm = confusion(recs)
    assert cm.total == 3
    off = sum(cm.counts[i][j] for i in range(7) for j in range(7) if i != j)
    assert off == 0 and cm.cell("within", "within") == 1


def test_confusion_invalid_bucket():
    cm = confusion([_rec(0, "junk"), _rec(1, "(Point, touches, Polygon)")])
    assert cm.total == 2 and cm.cell("within", "touches") == 1 and sum(cm.invalid) == 1
    assert cm.to_csv().splitlines()[0].startswith("truth\\predicted,equals")


def test_run_task1_mock(small):
    corpus, tagged = small
    items = task1_items([t for t in tagged if t.split == "eval"], corpus)
    m = task1_metrics(run_task1(items, ChatClient(GeometryAwareMock())))
    assert m["n"] == 175
    assert (m["format_validity"], m["geometry_type_validity"], m["predicate_validity"], m["accuracy"]) == (1.0,) * 4


def test_run_task1_swap(small):
    corpus, tagged = small
    items = task1_items([t for t in tagged if t.split == "eval"], corpus)
    recs = run_task1(items, ChatClient(GeometryAwareMock(["within->touches@Point/Polygon"])))
    cm = confusion(recs)
    wrong = [(i, j) for i in range(7) for j in range(7) if i != j and cm.counts[i][j]]
    assert wrong == [(1, 4)]  # within -> touches
    assert task1_metrics(recs)["dist_incorrect"] == 1.0


def test_run_task1_few_shot(small):
    corpus, tagged = small
    items = task1_items([t for t in tagged if t.split == "eval"][:10], corpus)
    pool = [t for t in tagged if t.split == "fewshot"]
    from toporel.evaluation import task1_examples

    recs = run_task1(items, ChatClient(GeometryAwareMock()), "few", task1_examples(pool, corpus))
    assert all(r.correct for r in recs) and "Example 1" in recs[0].prompt


def test_run_task1_backend_error_recorded():
    def broken(prompt, s):
        raise BackendError("503 after retries")

    item = task1_items([RelationTriplet("p", Predicate.WITHIN, "sq", "Point", "Polygon")],
                       {"p": SpatialEntity("p", parse_wkt("POINT (2 2)")), "sq": SpatialEntity("sq", parse_wkt(S))})
    recs = run_task1(item, ChatClient(CallableChat(broken)))
    assert recs[0].error and task1_metrics(recs)["n"] == 0


# task 2

VECS = {"q": [1, 0, 0, 0], "a": [1, 0, 0, 0], "b": [0.8, 0.6, 0, 0], "c": [0.6, 0.8, 0, 0], "d": [0, 0, 0, 1]}


def _fixture_rank(target, filt=()):
    ids = ["a", "b", "c", "d"]
    return rank_candidates(VECS["q"], np.array([VECS[i] for i in ids]), ids, target, filt)


def test_rank_order():
    assert _fixture_rank("a").ranked == ("a", "b", "c", "d")
    assert [_fixture_rank(t).rank for t in "abcd"] == [1, 2, 3, 4]


def test_rank_filtered():
    r = _fixture_rank("c", filt=["a", "b", "c"])
    assert r.ranked == ("c", "d") and r.rank == 1


def test_rank_ties_by_id():
    ids = ["z", "y", "x"]
    r = rank_candidates([0, 1], np.array([[1, 0], [1, 0], [0, 1]]), ids, "y")
    assert r.ranked == ("x", "y", "z") and r.rank == 2


def test_rank_dimension_mismatch():
    with pytest.raises(ValueError):
        rank_candidates([1, 0, 0], np.eye(2), ["a", "b"], "a")


def test_mrr_hits_examples():
    m = mrr_hits([1, 2, 4])
    assert m["mrr"] == pytest.approx(0.5833333333333333) and m["hits@5"] == 1.0
    m = mrr_hits([6])
    assert m["hits@5"] == 0.0 and m["hits@10"] == 1.0 and m["mrr"] == pytest.approx(1 / 6)
    assert mrr_hits([1, 1, 1])["mrr"] == 1.0
    assert mrr_hits([None, 1])["mrr"] == 0.5


def test_queries_roles():
    t = RelationTriplet("s", Predicate.CONTAINS, "o", "Polygon", "Point")
    (direct,) = task2_queries([t], "typed")
    (obj,) = task2_queries([t], "object_reversed")
    assert (direct.reference_id, direct.target_id, direct.target_type) == ("o", "s", "Polygon")
    assert (obj.reference_id, obj.target_id, obj.target_type) == ("s", "o", "Point")
    with pytest.raises(ValueError):
        task2_queries([t], "sideways")


def test_object_reversed_uses_inverse():
    corpus = {"s": SpatialEntity("s", parse_wkt(S)), "o": SpatialEntity("o", parse_wkt("POINT (2 2)"))}
    seen = []

    def gen(prompt, s):
        seen.append(prompt)
        return "POINT (2 2)"

    t = RelationTriplet("s", Predicate.CONTAINS, "o", "Polygon", "Point")
    run = run_task2([t], corpus, EmbeddingClient(HashEmbedder(16)), "object_reversed", ChatClient(CallableChat(gen)), n_generate=1)
    assert "within" in seen[0] and run.generations[0].predicate_match


def test_expanded_mean_fusion_reaches_rank_one(small):
    corpus, tagged = small
    rc = [t for t in tagged if t.split == "eval" and t.predicate is not Predicate.DISJOINT]
    # generator that answers with the true subject of the referenced object
    by_ref = {}
    for t in rc:
        by_ref.setdefault(geom_text(corpus[t.object_id]), set()).add(t.subject_id)
    unique = [t for t in rc if len(by_ref[geom_text(corpus[t.object_id])]) == 1]
    truth = {geom_text(corpus[t.object_id]): geom_text(corpus[t.subject_id]) for t in unique}

    def gen(prompt, s):
        return next(v for k, v in truth.items() if k in prompt)

    chat = ChatClient(CallableChat(gen))
    run = run_task2(unique, corpus, EmbeddingClient(HashEmbedder(256)), "expanded_1", chat, fusion="mean")
    assert len(unique) > 20
    assert run.metrics()["retrieval"]["mrr"] == 1.0


def test_invalid_generations_counted():
    corpus = {"p": SpatialEntity("p", parse_wkt("POINT (2 2)")), "sq": SpatialEntity("sq", parse_wkt(S))}
    t = RelationTriplet("p", Predicate.WITHIN, "sq", "Point", "Polygon")
    answers = iter(["nothing useful", "POINT (2 2)", "LINESTRING (1 1, 2 2)"])
    chat = ChatClient(CallableChat(lambda p, s: next(answers)))
    run = run_task2([t], corpus, EmbeddingClient(HashEmbedder(16)), "expanded_3", chat, max_concurrency=1)
    g = run.metrics()["generation"]
    assert g["n"] == 3 and g["valid_wkt"] == pytest.approx(2 / 3) and g["geometry_type"] == 0.5 and g["predicate"] == 1.0


def test_judge_generation_distance():
    ref = SpatialEntity("sq", parse_wkt(S))
    rec = judge_generation("q", 0, "", "POINT (0 2)", ref, "Point", Predicate.WITHIN)
    assert rec.got == "touches" and rec.distance == 1


def test_retrieval_needs_chat_for_expansion(small):
    corpus, tagged = small
    with pytest.raises(ValueError):
        run_task2(tagged[:2], corpus, EmbeddingClient(HashEmbedder(8)), "expanded_1")


def test_direct_mode_with_table_embedder():
    corpus = {"p": SpatialEntity("p", parse_wkt("POINT (2 2)")), "sq": SpatialEntity("sq", parse_wkt(S))}
    t = RelationTriplet("p", Predicate.WITHIN, "sq", "Point", "Polygon")
    query = f"Retrieve a geometry that is within the {geom_text(corpus['sq'])}."
    emb = EmbeddingClient(TableEmbedder({query: [1, 0], "POINT (2 2)": [1, 0], geom_text(corpus["sq"]): [0, 1]}))
    run = run_task2([t], corpus, emb, "direct")
    assert run.ranks[0].rank == 1


# task 3


def test_task3_single_predicate():
    m = task3_metrics([["touches"]] * 10, "touches")
    assert (m["frequency"], m["accuracy"], m["entropy"]) == (10, 1.0, 0.0)


@pytest.mark.parametrize("k", [2, 7])
def test_task3_uniform_entropy(k):
    names = ["equals", "within", "contains", "overlaps", "touches", "crosses", "disjoint"][:k]
    m = task3_metrics([[names[i % k]] for i in range(10 * k)], names[0])
    assert abs(m["entropy"] - math.log(k)) < 1e-9
    assert m["accuracy"] == pytest.approx(1 / k)


def test_task3_multi_answer_counts_each_mention():
    m = task3_metrics([["touches", "crosses"], ["touches"]], "touches")
    assert m["frequency"] == 2 and m["accuracy"] == pytest.approx(2 / 3)


def _pair(kind="none", context=()):
    return ConversionPair("is along", Predicate.TOUCHES, kind, tuple(context), 7)


def test_run_task3_mock():
    client = ChatClient(GeometryAwareMock(task3_table={"is along": ["touches", "crosses"]}))
    (res,) = run_task3([_pair()], client, repetitions=10)
    m = res.metrics()
    assert m["frequency"] == 5 and abs(m["entropy"] - math.log(2)) < 1e-9
    assert [a.sample_index for a in res.answers] == list(range(10))


def test_run_task3_context():
    client = ChatClient(GeometryAwareMock())
    (res,) = run_task3([_pair("geometry_type", ("LineString", "Polygon"))], client, repetitions=2)
    assert res.with_context and "A is LineString" in res.prompt
    (bare,) = run_task3([_pair("geometry_type", ("LineString", "Polygon"))], client, repetitions=2, with_context=False)
    assert "LineString" not in bare.prompt


# reports


def _runs(small):
    corpus, tagged = small
    ev = [t for t in tagged if t.split == "eval"]
    items = task1_items(ev[:30], corpus)
    t1 = Task1Run("LLM", "mock", "zero", run_task1(items, ChatClient(GeometryAwareMock())))
    t2 = run_task2([t for t in ev[:30] if t.predicate is not Predicate.DISJOINT], corpus, EmbeddingClient(HashEmbedder(32)), "typed")
    client = ChatClient(GeometryAwareMock())
    t3 = Task3Run("mock", run_task3([_pair("place_type", ("town", "river"))], client, 3),
                  run_task3([_pair("place_type", ("town", "river"))], client, 3, with_context=False))
    return [t1, t2, t3]


def test_report_empty_has_headers(tmp_path):
    report([], tmp_path)
    table = (tmp_path / "tables" / "task1_classification.md").read_text()
    assert table.splitlines()[0].startswith("| Approach") and len(table.splitlines()) == 2
    assert json.loads((tmp_path / "metrics.json").read_text()) == {"task1": []}


def test_report_is_stable(tmp_path, small):
    runs = _runs(small)
    a = report(runs, tmp_path / "a")
    report(runs, tmp_path / "b")
    for p in a:
        rel = p.relative_to(tmp_path / "a")
        assert (tmp_path / "b" / rel).read_bytes() == p.read_bytes()
    names = {p.name for p in a}
    assert {"metrics.json", "records.jsonl", "task1_validity.md", "task2_retrieval.md", "task3_place_type.md"} <= names


def test_runs_json_round_trip(small):
    runs = _runs(small)
    text = runs_to_json(runs)
    again = runs_from_json(text)
    assert runs_to_json(again) == text
    assert again[0].metrics() == runs[0].metrics()
    assert isinstance(again[1], Task2Run) and isinstance(again[1].ranks[0], RankResult)


def test_text_precision():
    from toporel import evaluation

    e = SpatialEntity("p", parse_wkt("POINT (1.123456789 2)"))
    assert geom_text(e) == "POINT (1.123457 2)"
    try:
        evaluation.set_text_precision(None)
        assert geom_text(e) == "POINT (1.123456789 2)"
    finally:
        evaluation.set_text_precision(6)
    with pytest.raises(ValueError):
        evaluation.set_text_precision(-2)
