import json
import re

import pytest

from toporel.cli import main


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    assert run("dataset", "synth", "--cells", 12, "--seed", 0, "--out", root / "corpus.csv") == 0
    assert run("dataset", "generate", "--corpus", root / "corpus.csv", "--out", root / "data",
               "--per-combo", 7, "--fewshot", 5, "--eval-size", 5, "--seed", 0) == 0
    return root


def test_relate(capsys):
    assert run("relate", "POINT (2 2)", "POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0))") == 0
    assert capsys.readouterr().out.strip() == "0FFFFF212 within"


def test_relate_parse_error():
    assert run("relate", "POINT (2", "POINT (1 1)") == 2


def test_neighborhood_distance(capsys):
    assert run("neighborhood-distance", "Polygon", "Polygon", "disjoint", "overlaps") == 0
    assert capsys.readouterr().out.strip() == "2"
    assert run("neighborhood-distance", "Point", "Point", "disjoint", "crosses") == 2


def test_generated_dataset(data):
    d = data / "data"
    summary = json.loads((d / "summary.json").read_text())
    lines = (d / "triplets.jsonl").read_text().splitlines()
    assert len(lines) == 35 * 12
    assert summary
    assert run("dataset", "verify", "--triplets", d / "triplets.jsonl", "--entities", d / "entities.jsonl") == 0


def test_dataset_shortfall_exit(tmp_path, data):
    assert run("dataset", "generate", "--corpus", data / "corpus.csv", "--out", tmp_path / "x",
               "--per-combo", 400, "--fewshot", 5, "--eval-size", 5) == 2


def test_task1_mock_run(tmp_path, data):
    out = tmp_path / "t1"
    assert run("task1", "run", "--data", data / "data", "--backend", "mock", "--style", "zero", "--out-dir", out) == 0
    m = json.loads((out / "metrics.json").read_text())["task1"][0]["metrics"]
    assert m["accuracy"] == 1.0 and m["format_validity"] == 1.0
    manifest = json.loads((out / "manifest.json").read_text())
    assert {"tool", "command", "config", "dataset_hashes", "template_hash", "models", "seeds", "timestamps"} <= set(manifest)
    assert (out / "tables" / "task1_classification.md").exists()


def test_report_merge(tmp_path, data):
    a, b = tmp_path / "a", tmp_path / "b"
    run("task1", "run", "--data", data / "data", "--backend", "mock", "--style", "zero", "--out-dir", a)
    run("task1", "run", "--data", data / "data", "--backend", "mock", "--style", "zero_cot",
        "--mock-error", "within->touches@Point/Polygon", "--out-dir", b)
    assert run("task1", "report", "--run-dir", a, "--run-dir", b, "--out-dir", tmp_path / "m") == 0
    assert len(json.loads((tmp_path / "m" / "metrics.json").read_text())["task1"]) == 2


def test_task2_retrieve(tmp_path, data):
    out = tmp_path / "t2"
    assert run("task2", "retrieve", "--data", data / "data", "--embedder", "hash", "--mode", "typed",
               "--out-dir", out) == 0
    m = json.loads((out / "metrics.json").read_text())["task2"][0]
    assert "mrr" in m["retrieval"]


def test_missing_key_exit_3(tmp_path, data, monkeypatch):
    monkeypatch.delenv("TOPOREL_TEST_KEY", raising=False)
    code = run("task1", "run", "--data", data / "data", "--backend", "http", "--api-key-env", "TOPOREL_TEST_KEY",
               "--limit", 2, "--out-dir", tmp_path / "x")
    assert code == 3


def test_config_file_and_flag_precedence(tmp_path, data):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nbackend = mock\nmock-error = within->touches@Point/Polygon\n")
    out = tmp_path / "c1"
    assert run("--config", cfg, "task1", "run", "--data", data / "data", "--out-dir", out) == 0
    m = json.loads((out / "metrics.json").read_text())["task1"][0]["metrics"]
    assert m["accuracy"] < 1.0
    # a flag replaces the configured list
    out2 = tmp_path / "c2"
    assert run("--config", cfg, "task1", "run", "--data", data / "data", "--mock-error", "equals->disjoint@Point/Point",
               "--out-dir", out2) == 0
    cm = (out2 / "confusion").glob("*Point_Polygon.csv")
    text = next(cm).read_text()
    assert "within,0,5,0,0,0,0,0,0" in text


def test_classifier_train_eval(tmp_path, data):
    model = tmp_path / "rf.json"
    assert run("classifier", "train", "--data", data / "data", "--model", model, "--embedder", "hash",
               "--estimators", 10, "--seed", 1) == 0
    assert run("classifier", "eval", "--data", data / "data", "--model", model, "--embedder", "hash",
               "--out-dir", tmp_path / "rfe") == 0
    m = json.loads((tmp_path / "rfe" / "metrics.json").read_text())["task1"][0]["metrics"]
    assert m["predicate_validity"] == 1.0


def test_missing_file_exit_2(tmp_path):
    assert run("task1", "run", "--data", tmp_path / "nothing", "--backend", "mock", "--out-dir", tmp_path / "o") == 2


def test_precision_flag(tmp_path, data):
    from toporel import evaluation

    out = tmp_path / "p"
    try:
        assert run("--precision", 2, "task1", "run", "--data", data / "data", "--backend", "mock", "--limit", 3,
                   "--out-dir", out) == 0
        rec = json.loads((out / "records.jsonl").read_text().splitlines()[0])
        line = next(l for l in rec["prompt"].splitlines() if l.startswith("Geometry A:"))
        assert max(len(d) for d in re.findall(r"\.(\d+)", line)) <= 2
        assert json.loads((out / "manifest.json").read_text())["options"]["precision"] == 2
    finally:
        evaluation.set_text_precision(6)
