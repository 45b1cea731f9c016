import itertools
import json

import pytest

from toporel import NotApplicable, Predicate, load_graphs, topological_distance
from toporel.geometry import SIMPLE_TYPES
from toporel.neighborhood import default_graphs, mean_incorrect_distance
from toporel.topology import applicable_predicates

PP = ("Polygon", "Polygon")


def test_polygon_pair_distances():
    assert topological_distance(PP, "disjoint", "touches") == 1
    assert topological_distance(PP, "disjoint", "overlaps") == 2
    assert topological_distance(PP, "within", "within") == 0


def test_graph_shapes():
    g = default_graphs()
    assert frozenset({Predicate.DISJOINT, Predicate.TOUCHES}) in g[PP].edges
    pp = g[("Point", "Point")]
    assert pp.nodes == {Predicate.EQUALS, Predicate.DISJOINT} and len(pp.edges) == 1
    assert {p.value for p in g[("LineString", "Polygon")].nodes} == {"disjoint", "touches", "crosses", "within"}


def test_all_nine_combinations_present():
    g = default_graphs()
    assert set(g) == set(itertools.product(SIMPLE_TYPES, SIMPLE_TYPES))


def test_graph_properties():
    for combo, g in default_graphs().items():
        assert g.is_connected(), combo
        assert g.nodes == set(applicable_predicates(*combo))
        for e in g.edges:
            assert len(e) == 2 and e <= g.nodes
        for a, b, c in itertools.product(sorted(g.nodes), repeat=3):
            dab = topological_distance(combo, a, b)
            assert dab == topological_distance(combo, b, a)
            assert (dab == 0) == (a == b)
            assert topological_distance(combo, a, c) <= dab + topological_distance(combo, b, c)


def test_inside_and_contains_do_not_touch_equals():
    g = default_graphs()[PP]
    assert frozenset({Predicate.WITHIN, Predicate.EQUALS}) not in g.edges
    assert frozenset({Predicate.CONTAINS, Predicate.EQUALS}) not in g.edges


def test_mirror_swaps_within_and_contains():
    g = default_graphs()
    assert topological_distance(("Point", "Polygon"), "within", "disjoint") == topological_distance(("Polygon", "Point"), "contains", "disjoint")


def test_not_applicable():
    with pytest.raises(NotApplicable):
        topological_distance(("Point", "Point"), "overlaps", "disjoint")
    with pytest.raises(NotApplicable):
        topological_distance(("Point", "Point"), "near", "disjoint")


def test_multi_types_use_base_graph():
    assert topological_distance(("MultiPolygon", "Polygon"), "disjoint", "overlaps") == 2


def test_mean_incorrect_distance():
    s = mean_incorrect_distance([("within", "within", PP)])
    assert s.mean == 0 and s.empty
    assert mean_incorrect_distance([("touches", "disjoint", PP)]).mean == 1.0
    s = mean_incorrect_distance([("touches", "disjoint", PP), ("overlaps", "disjoint", PP)])
    assert s.mean == 1.5 and s.count == 2 and not s.empty


def test_load_rejects_bad_tables(tmp_path):
    bad = {"combos": [{"type_a": "Point", "type_b": "Point", "edges": [["equals", "overlaps"]]}]}
    with pytest.raises(ValueError):
        load_graphs(bad)
    split = {"combos": [{"type_a": "Point", "type_b": "Polygon", "edges": [["disjoint", "touches"]]}]}
    with pytest.raises(ValueError):
        load_graphs(split)
    p = tmp_path / "g.json"
    p.write_text(json.dumps({"combos": [{"type_a": "Point", "type_b": "Point", "edges": [["equals", "disjoint"]]}]}))
    g = load_graphs(p)
    assert topological_distance(("Point", "Point"), "equals", "disjoint", g) == 1
