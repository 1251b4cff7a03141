import random

import pytest

from twotier.graph import (
    AGGREGATE_FRAME,
    DynamicNetwork,
    FrameGraph,
    aggregate,
    closeness,
    closeness_all,
    read_edge_csv,
    write_edge_csv,
)
from twotier.ingest import FrameSpec, parse_timestamp

from .oracles import bfs_closeness, random_weighted_adj


def _spec(frames: int = 2) -> FrameSpec:
    start = parse_timestamp("2021-01-01T00:00:00Z")
    from twotier.ingest import add_months

    return FrameSpec(start, add_months(start, frames), window_months=1)


def test_from_edges_accumulates_weights():
    g = FrameGraph.from_edges(0, [("a", "b", 1), ("b", "a", 2), ("b", "c", 1)])
    assert g.weight("a", "b") == 3
    assert g.weight("c", "b") == 1
    assert g.degree("b") == 2
    assert g.strength("b") == 4
    assert g.edge_count == 2
    assert g.total_weight == 4


def test_nodes_are_sorted_and_isolates_kept():
    g = FrameGraph.from_edges(3, [("x", "m", 1)], nodes=["z", "m", "x"])
    assert g.nodes == ["m", "x", "z"]
    assert g.degree("z") == 0
    assert g.strength("z") == 0


def test_rejects_self_loops_and_bad_weights():
    with pytest.raises(ValueError):
        FrameGraph.from_edges(0, [("a", "a", 1)])
    with pytest.raises(ValueError):
        FrameGraph.from_edges(0, [("a", "b", 0)])
    with pytest.raises(ValueError):
        FrameGraph(0, {"a": {"b": 1}, "b": {}})  # asymmetric


def test_edges_listing_is_canonical():
    g = FrameGraph.from_edges(0, [("d", "c", 2), ("a", "d", 1)])
    assert list(g.edges()) == [("a", "d", 1), ("c", "d", 2)]


def test_restrict_keeps_internal_edges_only():
    g = FrameGraph.from_edges(0, [("a", "b", 1), ("b", "c", 2), ("c", "d", 1)])
    sub = g.restrict({"a", "b", "c"})
    assert sub.nodes == ["a", "b", "c"]
    assert sub.weight("b", "c") == 2
    assert sub.weight("c", "d") == 0


def test_network_frame_index_must_match_position():
    spec = _spec(2)
    f0 = FrameGraph.from_edges(0, [("a", "b", 1)])
    f_bad = FrameGraph.from_edges(5, [("a", "b", 1)])
    with pytest.raises(ValueError):
        DynamicNetwork([f0, f_bad], spec, frozenset({"a", "b"}))


def test_aggregate_sums_weights_and_registry():
    spec = _spec(2)
    f0 = FrameGraph.from_edges(0, [("a", "b", 2)], activity_counts={"a": (1, 0), "b": (1, 0)})
    f1 = FrameGraph.from_edges(1, [("a", "b", 1), ("b", "c", 1)],
                               activity_counts={"a": (0, 1), "b": (0, 1), "c": (1, 0)})
    net = DynamicNetwork([f0, f1], spec, frozenset({"a", "b", "c", "zzz"}))
    agg = aggregate(net)
    assert agg.frame_index == AGGREGATE_FRAME
    assert agg.weight("a", "b") == 3
    # every registered member is a node, active or not
    assert "zzz" in agg.nodes
    assert agg.activity_counts("a") == (1, 1)
    assert agg.activity_counts("zzz") == (0, 0)


def test_closeness_against_bfs_oracle():
    rng = random.Random(4242)
    for _ in range(40):
        adj = random_weighted_adj(rng, max_nodes=18, max_edges=40)
        g = FrameGraph(0, adj)
        n = len(g.nodes)
        want = {v: bfs_closeness(adj, v, n) for v in adj}
        bulk = closeness_all(g, chunk=7)  # odd chunk to exercise chunking
        for v in adj:
            assert closeness(g, v) == pytest.approx(want[v], abs=1e-12)
            assert bulk[v] == pytest.approx(want[v], abs=1e-12)


def test_closeness_of_isolated_node_is_zero():
    g = FrameGraph.from_edges(0, [("a", "b", 1)], nodes=["a", "b", "c"])
    assert closeness(g, "c") == 0.0
    assert closeness_all(g)["c"] == 0.0


def test_edge_csv_round_trip(tmp_path):
    f0 = FrameGraph.from_edges(0, [("a", "b", 2), ("b", "c", 1)])
    f1 = FrameGraph.from_edges(1, [("a", "c", 4)])
    path = tmp_path / "frames.csv"
    write_edge_csv(path, [f0, f1])
    back = read_edge_csv(path)
    assert set(back) == {0, 1}
    assert list(back[0].edges()) == list(f0.edges())
    assert list(back[1].edges()) == list(f1.edges())
