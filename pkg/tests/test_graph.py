import pytest
from hypothesis import given, strategies as st

from lscd.graph import (EPOCHS, Edge, GraphError, Judgment, SenseDefNode,
                        UseNode, UsageGraph, pair_key)

from conftest import make_nodes, random_judged_graph


def test_pair_key_canonical_order():
    assert pair_key("b", "a") == ("a", "b")
    assert pair_key("a", "b") == ("a", "b")


def test_pair_key_rejects_self_loop():
    with pytest.raises(GraphError):
        pair_key("a", "a")


def test_use_node_validation():
    with pytest.raises(GraphError):
        UseNode("x", "C3", ("a",), 0, "w")
    with pytest.raises(GraphError):
        UseNode("x", "C1", ("a",), 1, "w")


def test_judgment_value_range():
    for v in range(5):
        Judgment(("a", "b"), "ann", v)
    with pytest.raises(GraphError):
        Judgment(("a", "b"), "ann", 5)
    with pytest.raises(GraphError):
        Judgment(("a", "b"), "ann", -1)


def test_judgment_canonicalizes_pair():
    j = Judgment(("b", "a"), "ann", 3)
    assert j.pair == ("a", "b")


def test_edge_weight_is_median_of_nonzero():
    js = tuple(Judgment(("a", "b"), f"x{i}", v) for i, v in enumerate((4, 1, 3, 0)))
    e = Edge(("a", "b"), js)
    assert e.weight == 3.0
    assert e.shifted_weight == 0.5
    assert e.is_positive


def test_edge_weight_none_when_all_zero():
    e = Edge(("a", "b"), (Judgment(("a", "b"), "x", 0),))
    assert e.weight is None
    assert e.shifted_weight is None
    assert e.is_positive is None


def test_even_count_median_can_sit_on_boundary():
    js = (Judgment(("a", "b"), "x", 2), Judgment(("a", "b"), "y", 3))
    e = Edge(("a", "b"), js)
    assert e.weight == 2.5
    assert e.shifted_weight == 0.0
    assert e.is_positive  # boundary counts as positive


@given(st.lists(st.integers(0, 4), min_size=1, max_size=9))
def test_median_is_order_independent(values):
    a = Edge(("a", "b"), tuple(Judgment(("a", "b"), f"x{i}", v)
                               for i, v in enumerate(values)))
    b = Edge(("a", "b"), tuple(Judgment(("a", "b"), f"x{i}", v)
                               for i, v in enumerate(reversed(values))))
    assert a.weight == b.weight


def test_duplicate_node_rejected():
    n = make_nodes(1)[0]
    g = UsageGraph.build("w", [n])
    with pytest.raises(GraphError):
        g.with_node(n)


def test_judgment_on_unknown_node_rejected():
    g = UsageGraph.build("w", make_nodes(2))
    with pytest.raises(GraphError):
        g.with_judgment(Judgment(("w-n000", "ghost"), "a", 4))


def test_immutability_of_updates():
    g = UsageGraph.build("w", make_nodes(2))
    g2 = g.with_judgment(Judgment(("w-n000", "w-n001"), "a", 4))
    assert not g.edges
    assert len(g2.edges) == 1


def test_subgraph_by_epoch():
    g = random_judged_graph(6, seed=3)
    for epoch in EPOCHS:
        sub = g.subgraph(epoch)
        assert all(n.corpus == epoch for n in sub.use_nodes())
        for p in sub.edges:
            assert p[0] in sub.nodes and p[1] in sub.nodes


def test_subgraph_drops_sense_nodes():
    g = UsageGraph.build("w", make_nodes(2) + [SenseDefNode("s1", "a gloss", "w")])
    assert "s1" not in g.subgraph("C1").nodes


def test_remove_undecidable_majority_rule():
    g = UsageGraph.build("w", make_nodes(3))
    ids = sorted(g.nodes)
    # n0 gets two 0-judgments out of three -> removed
    g = g.with_judgments([
        Judgment((ids[0], ids[1]), "a", 0),
        Judgment((ids[0], ids[2]), "a", 0),
        Judgment((ids[0], ids[1]), "b", 4),
        Judgment((ids[1], ids[2]), "a", 4),
    ])
    pruned = g.remove_undecidable_nodes()
    assert ids[0] not in pruned.nodes
    assert set(pruned.edges) == {(ids[1], ids[2])}


def test_remove_undecidable_keeps_balanced_node():
    g = UsageGraph.build("w", make_nodes(2))
    ids = sorted(g.nodes)
    g = g.with_judgments([
        Judgment((ids[0], ids[1]), "a", 0),
        Judgment((ids[0], ids[1]), "b", 3),
    ])
    assert set(g.remove_undecidable_nodes().nodes) == set(ids)


def test_serialization_round_trip_exact(small_graph):
    text = small_graph.dumps()
    again = UsageGraph.loads(text)
    assert again.dumps() == text
    assert set(again.nodes) == set(small_graph.nodes)
    assert {p: e.weight for p, e in again.edges.items()} == \
           {p: e.weight for p, e in small_graph.edges.items()}


def test_serialization_includes_sense_nodes():
    g = UsageGraph.build("w", make_nodes(2) + [SenseDefNode("s1", "a gloss", "w")])
    g = g.with_judgment(Judgment(("w-n000", "s1"), "a", 4))
    again = UsageGraph.loads(g.dumps())
    assert isinstance(again.nodes["s1"], SenseDefNode)
    assert again.dumps() == g.dumps()


def test_loads_rejects_bad_version(small_graph):
    text = small_graph.dumps().replace('"version":1', '"version":99')
    with pytest.raises(GraphError):
        UsageGraph.loads(text)


def test_file_round_trip(tmp_path, small_graph):
    path = tmp_path / "g.jsonl"
    small_graph.dump(path)
    assert UsageGraph.load(path).dumps() == small_graph.dumps()
