import json

import pytest

from causalfront.graph import (CausalGraph, GraphError, NodeSpec, bell_graph, check_graph, load_graph,
                               save_graph, topological_order, validate_graph)


def chain(*penalized):
    return CausalGraph((NodeSpec("u", 2), NodeSpec("v", 3, parents=("u",)), NodeSpec("w", 2, parents=("v", "u"))),
                       penalized)


def test_bell_graph_layout():
    g = bell_graph()
    assert g.names == ("a", "b", "x", "y", "lambda")
    assert g.observables == ("a", "b", "x", "y")
    assert g.parents("a") == ("x", "lambda")
    assert g.tensor_shape("b") == (2, 2, 4)
    assert g.penalized_edges == ()


def test_extra_edges_are_appended_and_penalized():
    g = bell_graph(extra_edges=[("a", "b"), ("x", "lambda")])
    assert g.parents("b") == ("y", "lambda", "a")
    assert g.parents("lambda") == ("x",)
    assert g.penalized_edges == (("a", "b"), ("x", "lambda"))
    assert g.tensor_shape("lambda") == (4, 2)


def test_grandparents_of_b_with_signalling_edge():
    g = bell_graph(extra_edges=[("a", "b")])
    assert g.grandparents("b") == {"x", "lambda"}


def test_duplicate_edge_rejected():
    with pytest.raises(GraphError):
        bell_graph(extra_edges=[("x", "a")])


def test_cycle_detected():
    g = CausalGraph((NodeSpec("p", 2, parents=("q",)), NodeSpec("q", 2, parents=("p",))))
    assert topological_order(g) is None
    assert any("cycle" in p for p in validate_graph(g))
    with pytest.raises(GraphError):
        check_graph(g)


@pytest.mark.parametrize("nodes, fragment", [
    ((NodeSpec("p", 0),), "cardinality"),
    ((NodeSpec("p", 2, parents=("z",)),), "undeclared"),
    ((NodeSpec("p", 2), NodeSpec("p", 2)), "duplicate"),
    ((NodeSpec("p", 2), NodeSpec("q", 2, parents=("p", "p"))), "twice"),
])
def test_invalid_graphs(nodes, fragment):
    assert any(fragment in p for p in validate_graph(CausalGraph(nodes)))


def test_penalized_edge_must_exist():
    assert validate_graph(chain(("w", "u")))
    assert not validate_graph(chain(("u", "w")))


def test_topological_order_respects_parents():
    order = topological_order(chain())
    assert order.index("u") < order.index("v") < order.index("w")


def test_without_edges_drops_parent_and_penalty():
    g = bell_graph(extra_edges=[("a", "b"), ("x", "lambda")])
    h = g.without_edges([("a", "b")])
    assert h.parents("b") == ("y", "lambda")
    assert h.penalized_edges == (("x", "lambda"),)
    with pytest.raises(GraphError):
        g.without_edges([("b", "a")])


def test_round_trip_and_digest(tmp_path):
    g = bell_graph(extra_edges=[("a", "b")])
    save_graph(g, tmp_path / "g.json")
    h = load_graph(tmp_path / "g.json")
    assert h == g and h.digest() == g.digest()
    assert CausalGraph.from_dict(json.loads(json.dumps(g.to_dict()))) == g
    assert bell_graph().digest() != g.digest()
