"""Random-forest baseline over concatenated geometry embeddings.

Trees are CART with Gini impurity, grown on bootstrap resamples with a
random feature subset at every node.  Each tree draws from its own child
of a master :class:`numpy.random.SeedSequence`, so results do not depend
on training order.  Models serialize to a versioned JSON tree dump.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .topology import Predicate, is_valid_combination

FORMAT_VERSION = "toporel-forest/1"
Label = tuple[str, str, str]


class DataError(ValueError):
    pass


class FormatError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledFeature:
    feature: np.ndarray
    label: Label


def concat_features(enc_a: np.ndarray, enc_b: np.ndarray) -> np.ndarray:
    """[Enc(A); Enc(B)] row-wise."""
    return np.concatenate([np.atleast_2d(enc_a), np.atleast_2d(enc_b)], axis=1)


def _label(t) -> Label:
    ta, p, tb = t
    return (str(ta), Predicate(p).value, str(tb))


@dataclass
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        active = self.left[node] >= 0
        while active.any():
            idx = np.flatnonzero(active)
            n = node[idx]
            go_left = X[idx, self.feature[n]] <= self.threshold[n]
            node[idx] = np.where(go_left, self.left[n], self.right[n])
            active = self.left[node] >= 0
        return self.value[node]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(
            np.asarray(d["feature"], dtype=np.int64),
            np.asarray(d["threshold"], dtype=float),
            np.asarray(d["left"], dtype=np.int64),
            np.asarray(d["right"], dtype=np.int64),
            np.asarray(d["value"], dtype=np.int64),
        )


def _best_split(X: np.ndarray, Y: np.ndarray, feats: np.ndarray) -> Optional[tuple[int, float, float]]:
    """Lowest weighted Gini split ``(feature, threshold, impurity)`` over
    ``feats``; None when every candidate feature is constant."""
    n, C = Y.shape
    total = Y.sum(axis=0)
    nl = np.arange(1, n, dtype=float)[:, None]
    nr = n - nl
    best = None
    step = max(1, 4_000_000 // max(n * C, 1))
    for s in range(0, len(feats), step):
        fs = feats[s : s + step]
        order = np.argsort(X[:, fs], axis=0, kind="stable")
        x = np.take_along_axis(X[:, fs], order, axis=0)
        valid = x[:-1] < x[1:]
        if not valid.any():
            continue
        left = np.cumsum(Y[order], axis=0)[:-1]
        right = total - left
        # weighted Gini: n_l (1 - sum p_l^2) + n_r (1 - sum p_r^2), over n
        imp = (nl - (left**2).sum(axis=2) / nl + nr - (right**2).sum(axis=2) / nr) / n
        imp = np.where(valid, imp, np.inf)
        flat = int(np.argmin(imp.T))
        j, i = divmod(flat, n - 1)
        if np.isfinite(imp[i, j]) and (best is None or imp[i, j] < best[2]):
            best = (int(fs[j]), float((x[i, j] + x[i + 1, j]) / 2), float(imp[i, j]))
    return best


def _grow(X: np.ndarray, y: np.ndarray, n_classes: int, rng: np.random.Generator, max_features: int, min_samples_split: int, max_depth: Optional[int]) -> Tree:
    feature, threshold, left, right, value = [], [], [], [], []

    def leaf(ids) -> int:
        counts = np.bincount(y[ids], minlength=n_classes)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(int(np.argmax(counts)))
        return len(value) - 1

    d = X.shape[1]
    stack = [(np.arange(len(X)), 0, None, None)]
    while stack:
        ids, depth, parent, side = stack.pop()
        labels = y[ids]
        pure = (labels == labels[0]).all()
        if pure or len(ids) < min_samples_split or (max_depth is not None and depth >= max_depth):
            node = leaf(ids)
        else:
            Xs = X[ids]
            Ys = np.eye(n_classes, dtype=np.int32)[labels]
            feats = rng.choice(d, size=min(max_features, d), replace=False)
            split = _best_split(Xs, Ys, feats)
            if split is None:
                rest = np.setdiff1d(np.arange(d), feats)
                split = _best_split(Xs, Ys, rest) if len(rest) else None
            if split is None:
                node = leaf(ids)
            else:
                f, t, _ = split
                feature.append(f)
                threshold.append(t)
                left.append(-1)
                right.append(-1)
                value.append(-1)
                node = len(value) - 1
                go = Xs[:, f] <= t
                stack.append((ids[~go], depth + 1, node, "right"))
                stack.append((ids[go], depth + 1, node, "left"))
        if parent is not None:
            (left if side == "left" else right)[parent] = node
    return Tree(
        np.asarray(feature, dtype=np.int64),
        np.asarray(threshold, dtype=float),
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
        np.asarray(value, dtype=np.int64),
    )


class ForestModel:
    """A fitted forest; labels are (type_a, predicate, type_b) tuples."""

    def __init__(self, classes: Sequence[Label], trees: Sequence[Tree], n_features: int, params: dict):
        self.classes = [tuple(c) for c in classes]
        self.trees = list(trees)
        self.n_features = n_features
        self.params = dict(params)

    def _check(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DataError(f"expected {self.n_features} features, got {X.shape[1]}")
        return X

    def votes(self, X) -> np.ndarray:
        X = self._check(X)
        counts = np.zeros((len(X), len(self.classes)), dtype=np.int64)
        rows = np.arange(len(X))
        for t in self.trees:
            np.add.at(counts, (rows, t.apply(X)), 1)
        return counts

    def predict_many(self, X) -> list[Label]:
        # argmax returns the first maximum; classes are sorted, so ties go
        # to the lexicographically smallest label
        return [self.classes[i] for i in np.argmax(self.votes(X), axis=1)]

    def to_dict(self) -> dict:
        return {
            "version": FORMAT_VERSION,
            "classes": [list(c) for c in self.classes],
            "n_features": self.n_features,
            "params": self.params,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForestModel":
        if not isinstance(d, dict) or d.get("version") != FORMAT_VERSION:
            raise FormatError(f"unsupported model version {d.get('version') if isinstance(d, dict) else None!r}")
        try:
            return cls([tuple(c) for c in d["classes"]], [Tree.from_dict(t) for t in d["trees"]], int(d["n_features"]), d.get("params", {}))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed model: {exc}") from None


def train(
    features: Union[Sequence[LabeledFeature], np.ndarray],
    labels: Optional[Sequence] = None,
    estimators: int = 100,
    seed: int = 0,
    max_features: Union[str, int] = "sqrt",
    min_samples_split: int = 2,
    max_depth: Optional[int] = None,
) -> ForestModel:
    """Fit a forest on labeled features (or on a matrix plus labels)."""
    if labels is None:
        items = list(features)
        lengths = {len(np.ravel(it.feature)) for it in items}
        if len(lengths) > 1:
            raise DataError(f"feature lengths differ: {sorted(lengths)}")
        X = np.asarray([np.ravel(it.feature) for it in items], dtype=float)
        labels = [it.label for it in items]
    else:
        try:
            X = np.asarray(features, dtype=float)
        except ValueError:
            raise DataError("feature lengths differ") from None
        if X.ndim != 2 or len(X) != len(labels):
            raise DataError("features must be a 2-D array with one row per label")
    labs = [_label(l) for l in labels]
    for l in set(labs):
        if not is_valid_combination(*l):
            raise DataError(f"label {l} is not a valid combination")
    classes = sorted(set(labs))
    if len(classes) < 2:
        raise DataError("training needs at least two classes")
    if not np.isfinite(X).all():
        raise DataError("features contain non-finite values")
    index = {c: i for i, c in enumerate(classes)}
    y = np.asarray([index[l] for l in labs], dtype=np.int64)
    d = X.shape[1]
    k = max(1, int(math.sqrt(d))) if max_features == "sqrt" else int(max_features)
    trees = []
    for child in np.random.SeedSequence(seed).spawn(estimators):
        rng = np.random.default_rng(child)
        boot = rng.integers(0, len(X), len(X))
        trees.append(_grow(X[boot], y[boot], len(classes), rng, k, min_samples_split, max_depth))
    params = {"estimators": estimators, "seed": seed, "max_features": k, "min_samples_split": min_samples_split, "max_depth": max_depth}
    return ForestModel(classes, trees, d, params)


def predict(model: ForestModel, feature) -> Label:
    return model.predict_many(np.atleast_2d(feature))[0]


def dumps(model: ForestModel) -> str:
    return json.dumps(model.to_dict(), sort_keys=True, separators=(",", ":"))


def save(model: ForestModel, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps(model), encoding="utf-8")


def load(path: Union[str, Path]) -> ForestModel:
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise FormatError(f"cannot read model file: {exc}") from None
    return ForestModel.from_dict(d)


def separable_benchmark(per_class: int = 20, dim: int = 64, noise: float = 0.2, seed: int = 0):
    """Synthetic 35-class data: each class owns one coordinate set to 1,
    plus Gaussian noise.  Returns ``(X, labels)``."""
    from .topology import all_combinations

    combos = [_label(c) for c in all_combinations()]
    rng = np.random.default_rng(seed)
    X, labels = [], []
    for i, c in enumerate(combos):
        for _ in range(per_class):
            v = rng.normal(0.0, noise, dim)
            v[i % dim] += 1.0
            X.append(v)
            labels.append(c)
    return np.asarray(X), labels
