import json

import numpy as np
import pytest

from toporel.classifier import (
    DataError,
    FormatError,
    ForestModel,
    LabeledFeature,
    Tree,
    concat_features,
    dumps,
    load,
    predict,
    save,
    separable_benchmark,
    train,
)

POS = ("Polygon", "contains", "Point")
NEG = ("Point", "within", "Polygon")


def toy(n=60, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 4))
    y = [POS if x[0] > 0 else NEG for x in X]
    return X, y


def test_toy_separable():
    X, y = toy()
    m = train(X, y, estimators=15, seed=1)
    assert m.predict_many(X) == y
    assert predict(m, np.array([2.0, 0, 0, 0])) == POS
    assert predict(m, np.array([-2.0, 0, 0, 0])) == NEG


def test_labeled_feature_input():
    X, y = toy(30)
    items = [LabeledFeature(x, l) for x, l in zip(X, y)]
    assert dumps(train(items, estimators=5)) == dumps(train(X, y, estimators=5))


def test_deterministic():
    X, y = toy()
    assert dumps(train(X, y, estimators=10, seed=3)) == dumps(train(X, y, estimators=10, seed=3))
    assert dumps(train(X, y, estimators=10, seed=3)) != dumps(train(X, y, estimators=10, seed=4))


def test_data_errors():
    with pytest.raises(DataError):
        train([LabeledFeature(np.zeros(3), POS), LabeledFeature(np.zeros(4), NEG)])
    with pytest.raises(DataError):
        train(np.zeros((2, 3)), [POS, ("Point", "overlaps", "Point")])
    with pytest.raises(DataError):
        train(np.zeros((2, 3)), [POS, POS])
    with pytest.raises(DataError):
        train(np.array([[np.nan, 0.0], [1.0, 0.0]]), [POS, NEG])
    m = train(*toy(20), estimators=3)
    with pytest.raises(DataError):
        m.predict_many(np.zeros((1, 7)))


def test_tie_goes_to_smaller_label():
    # two single-leaf trees voting for different classes
    leaf = lambda v: Tree(np.array([-1]), np.array([0.0]), np.array([-1]), np.array([-1]), np.array([v]))
    m = ForestModel(sorted([POS, NEG]), [leaf(1), leaf(0)], 2, {})
    assert predict(m, np.zeros(2)) == min(POS, NEG)


def test_unanimous_vote():
    leaf = lambda v: Tree(np.array([-1]), np.array([0.0]), np.array([-1]), np.array([-1]), np.array([v]))
    m = ForestModel(sorted([POS, NEG]), [leaf(1), leaf(1), leaf(1)], 2, {})
    assert predict(m, np.zeros(2)) == sorted([POS, NEG])[1]


def test_save_load_round_trip(tmp_path):
    X, y = toy()
    m = train(X, y, estimators=8)
    save(m, tmp_path / "m.json")
    again = load(tmp_path / "m.json")
    probe = np.random.default_rng(9).normal(size=(100, 4))
    assert again.predict_many(probe) == m.predict_many(probe)
    assert dumps(again) == dumps(m)


def test_load_errors(tmp_path):
    (tmp_path / "bad.json").write_text("{oops")
    with pytest.raises(FormatError):
        load(tmp_path / "bad.json")
    m = train(*toy(20), estimators=2).to_dict()
    m["version"] = "other/9"
    (tmp_path / "v.json").write_text(json.dumps(m))
    with pytest.raises(FormatError):
        load(tmp_path / "v.json")


def test_concat_features():
    assert concat_features(np.ones(3), np.zeros(2)).shape == (1, 5)
    assert concat_features(np.ones((4, 3)), np.zeros((4, 2))).shape == (4, 5)


def test_benchmark_shape():
    X, labels = separable_benchmark(per_class=2, dim=40)
    assert X.shape == (70, 40) and len(set(labels)) == 35
