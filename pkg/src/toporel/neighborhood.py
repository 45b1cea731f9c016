"""Conceptual-neighborhood graphs and the topological distance between predicates."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Optional, Union

from .geometry import base_type
from .topology import Predicate, applicable_predicates, inverse

Combo = tuple[str, str]


class NotApplicable(ValueError):
    """Predicate is not a node of the combination's graph."""


@dataclass(frozen=True)
class NeighborhoodGraph:
    combo: Combo
    nodes: frozenset[Predicate]
    edges: frozenset[frozenset[Predicate]]

    def neighbors(self, p: Predicate) -> list[Predicate]:
        return sorted((q for e in self.edges if p in e for q in e if q != p), key=_order)

    def distances_from(self, p: Predicate) -> dict[Predicate, int]:
        dist = {p: 0}
        queue = deque([p])
        while queue:
            u = queue.popleft()
            for v in self.neighbors(u):
                if v not in dist:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist

    def is_connected(self) -> bool:
        if not self.nodes:
            return True
        return len(self.distances_from(next(iter(self.nodes)))) == len(self.nodes)

    def mirrored(self) -> "NeighborhoodGraph":
        return NeighborhoodGraph(
            (self.combo[1], self.combo[0]),
            frozenset(inverse(p) for p in self.nodes),
            frozenset(frozenset(inverse(p) for p in e) for e in self.edges),
        )


def _order(p: Predicate) -> int:
    return list(Predicate).index(p)


def _build(type_a: str, type_b: str, edges: Iterable) -> NeighborhoodGraph:
    nodes = frozenset(applicable_predicates(type_a, type_b))
    es = set()
    for u, v in edges:
        u, v = Predicate(u), Predicate(v)
        if u == v:
            raise ValueError(f"self-loop on {u} in {type_a}/{type_b}")
        if u not in nodes or v not in nodes:
            raise ValueError(f"edge {u}-{v} uses a predicate not applicable to {type_a}/{type_b}")
        es.add(frozenset((u, v)))
    g = NeighborhoodGraph((type_a, type_b), nodes, frozenset(es))
    if not g.is_connected():
        raise ValueError(f"neighborhood graph for {type_a}/{type_b} is not connected")
    return g


def load_graphs(source: Union[str, Path, Mapping, None] = None) -> dict[Combo, NeighborhoodGraph]:
    """Read adjacency tables (JSON file path or parsed mapping).  Combinations
    missing from the table are filled in by mirroring their swapped pair."""
    if source is None:
        data = json.loads(resources.files("toporel").joinpath("data/neighborhoods.json").read_text())
    elif isinstance(source, Mapping):
        data = source
    else:
        data = json.loads(Path(source).read_text())
    graphs: dict[Combo, NeighborhoodGraph] = {}
    for rec in data["combos"]:
        g = _build(rec["type_a"], rec["type_b"], rec["edges"])
        if "nodes" in rec and {Predicate(p) for p in rec["nodes"]} != set(g.nodes):
            raise ValueError(f"declared nodes for {g.combo} differ from the applicable predicates")
        graphs[g.combo] = g
    for combo, g in list(graphs.items()):
        graphs.setdefault((combo[1], combo[0]), g.mirrored())
    return graphs


_DEFAULT: Optional[dict[Combo, NeighborhoodGraph]] = None


def default_graphs() -> dict[Combo, NeighborhoodGraph]:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_graphs()
    return dict(_DEFAULT)


def topological_distance(combo: Combo, r1, r2, graphs: Optional[Mapping[Combo, NeighborhoodGraph]] = None) -> int:
    """Unit-edge shortest-path length between two predicates."""
    graphs = graphs if graphs is not None else default_graphs()
    key = (base_type(combo[0]), base_type(combo[1]))
    if key not in graphs:
        raise NotApplicable(f"no neighborhood graph for {key[0]}/{key[1]}")
    g = graphs[key]
    try:
        r1, r2 = Predicate(r1), Predicate(r2)
    except ValueError as exc:
        raise NotApplicable(str(exc)) from None
    for r in (r1, r2):
        if r not in g.nodes:
            raise NotApplicable(f"{r} is not applicable to {key[0]}/{key[1]}")
    return g.distances_from(r1)[r2]


class DistanceSummary(NamedTuple):
    mean: float
    count: int
    empty: bool


def mean_incorrect_distance(records: Iterable[tuple], graphs=None) -> DistanceSummary:
    """Mean distance over ``(predicted, truth, combo)`` records whose
    prediction is wrong; ``empty`` is set (and mean 0) when none are wrong."""
    ds = [topological_distance(c, p, t, graphs) for p, t, c in records if Predicate(p) != Predicate(t)]
    if not ds:
        return DistanceSummary(0.0, 0, True)
    return DistanceSummary(sum(ds) / len(ds), len(ds), False)
