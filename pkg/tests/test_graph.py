import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adjfol.graph import (Curve, DecoratedGraph, GraphError, canonical_key, chain_graph, degrees,
                          intersection_matrix, is_negative_definite, make_graph, validate)
from strategies import graphs, isomorphic


def test_curve_rules():
    with pytest.raises(GraphError):
        Curve("A", 0)
    with pytest.raises(GraphError):
        Curve("A", -2, True)  # invariant needs z
    with pytest.raises(GraphError):
        Curve("A", -2, False, z=1)
    with pytest.raises(GraphError):
        Curve("A", -2, False, tang=0, nodal=True)


def test_graph_rules():
    a = Curve("A", -2, z=2)
    with pytest.raises(GraphError):
        DecoratedGraph((a, a))
    with pytest.raises(GraphError):
        DecoratedGraph((a,), (("A", "A", 1),))
    with pytest.raises(GraphError):
        DecoratedGraph((a,), (("A", "B", 1),))


def test_parallel_edges_merge():
    g = make_graph([("A", -3, "Z", 2), ("B", -3, "Z", 2)], [("A", "B", 1), ("B", "A", 1)])
    assert g.edges == (("A", "B", 2),)
    assert intersection_matrix(g) == [[-3, 2], [2, -3]]


@settings(max_examples=150)
@given(graphs())
def test_json_round_trip_is_byte_identical(g):
    text = g.dumps()
    h = DecoratedGraph.loads(text)
    assert h == g
    assert h.dumps() == text


def test_json_field_order():
    g = make_graph([("A", -2, "Z", 1), ("B", -1, "T", 0)], [("A", "B", 1)])
    assert g.dumps() == ('{"curves": [{"id": "A", "self": -2, "genus": 0, "nodal": false, "invariant": true, '
                         '"z": 1}, {"id": "B", "self": -1, "genus": 0, "nodal": false, "invariant": false, '
                         '"tang": 0}], "edges": [["A", "B", 1]]}')


@settings(max_examples=150)
@given(graphs())
def test_negative_definite_matches_eigenvalues(g):
    m = np.array(intersection_matrix(g), dtype=float)
    eig = np.linalg.eigvalsh(m)
    exact = is_negative_definite(intersection_matrix(g))
    # eigenvalues far from 0 decide unambiguously
    if np.all(eig < -1e-9):
        assert exact
    elif np.any(eig > 1e-9):
        assert not exact


def test_degrees():
    g = make_graph([("A", -2, "Z", 2), ("B", -1, "T", 0), ("C", -3, "Z", 2)], [("A", "B", 1), ("A", "C", 2)])
    assert degrees(g, "A") == (3, 1, 2)
    assert degrees(g, "B") == (1, 0, 1)


def test_validate_filters():
    # a (-1)-invariant curve violates minimality
    assert [v.code for v in validate(chain_graph([-1], [1]))] == ["MIN"]
    # z = 0 on a smooth invariant curve
    assert "R1" in [v.code for v in validate(chain_graph([-2], [0]))]
    # z below the number of invariant neighbours
    assert "R2" in [v.code for v in validate(chain_graph([-2, -2, -2], [2, 1, 2]))]
    # an invariant tree with no room for a separatrix
    assert "R3" in [v.code for v in validate(chain_graph([-2, -2], [1, 1]))]
    assert "ND" in [v.code for v in validate(chain_graph([-1, -1], [("T", 0), ("T", 0)]))]
    assert validate(chain_graph([-2, -2], [1, 2])) == []
    assert validate(chain_graph([-2, -2], [1, 1]), filters=["ND", "MIN"]) == []
    with pytest.raises(ValueError):
        validate(chain_graph([-2]), filters=["XX"])


@settings(max_examples=100)
@given(graphs(), st.randoms())
def test_canonical_key_ignores_labels(g, rnd):
    perm = list(range(len(g)))
    rnd.shuffle(perm)
    assert canonical_key(g.relabel(perm)) == canonical_key(g)


@settings(max_examples=300)
@given(graphs(max_curves=3, max_mult=1), graphs(max_curves=3, max_mult=1))
def test_canonical_key_decides_isomorphism(g, h):
    assert (canonical_key(g) == canonical_key(h)) == isomorphic(g, h)


def test_canonical_key_separates_decorations():
    a = chain_graph([-2, -3], [1, 2])
    b = chain_graph([-2, -3], [2, 1])
    assert canonical_key(a) != canonical_key(b)
    assert canonical_key(a) == canonical_key(chain_graph([-3, -2], [2, 1]))
    json.loads(canonical_key(a))


def test_dot_output():
    g = make_graph([("A", -2, "Z", 1), ("B", -1, "T", 0)], [("A", "B", 2)])
    dot = g.to_dot()
    assert dot.startswith("graph E {")
    assert '"B" [label="B | -1 | tang=0", style=dashed];' in dot
    assert '"A" -- "B" [label="2"];' in dot
