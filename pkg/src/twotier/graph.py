"""Weighted undirected graph model shared by every analysis stage.

``FrameGraph`` is one time-frame snapshot; ``DynamicNetwork`` is the ordered
stack of snapshots plus the all-time member registry.  Graphs are immutable
by convention: no public mutator exists and every algorithm builds new
instances, so per-frame work could run concurrently without locking (the
shipped implementation is sequential, which keeps runs bit-reproducible).
"""

from __future__ import annotations

import csv
from collections import deque
from typing import TYPE_CHECKING, Iterable, Iterator, Mapping, Sequence

if TYPE_CHECKING:  # pragma: no cover - import cycle guard, typing only
    from .ingest import FrameSpec

#: Frame index used for the all-frames aggregate graph.
AGGREGATE_FRAME = -1


class FrameGraph:
    """Undirected weighted graph for a single time frame.

    Edge weights count interaction links between a node pair inside the
    frame, so they are integers >= 1.  Self-loops are rejected.  The node set
    may include isolated nodes (members who only joined singleton teams).
    ``activity_counts`` tracks per-node team participations inside the frame,
    split into (rewarding, non_rewarding).
    """

    __slots__ = ("frame_index", "_adj", "_counts", "_total_weight")

    def __init__(
        self,
        frame_index: int,
        adjacency: Mapping[str, Mapping[str, int]],
        activity_counts: Mapping[str, tuple[int, int]] | None = None,
    ) -> None:
        adj: dict[str, dict[str, int]] = {}
        for node in sorted(adjacency):
            row = adjacency[node]
            adj[node] = {v: row[v] for v in sorted(row)}
        total = 0
        for node, row in adj.items():
            for other, weight in row.items():
                if other == node:
                    raise ValueError(f"self-loop on node {node!r}")
                if not isinstance(weight, int) or weight < 1:
                    raise ValueError(
                        f"edge {node!r}-{other!r} has non-positive weight {weight!r}"
                    )
                back = adj.get(other)
                if back is None or back.get(node) != weight:
                    raise ValueError(f"asymmetric edge {node!r}-{other!r}")
                total += weight
        self.frame_index = frame_index
        self._adj = adj
        self._total_weight = total // 2
        counts = dict(activity_counts or {})
        self._counts = {v: counts.get(v, (0, 0)) for v in adj}

    # -- construction helpers ------------------------------------------------

    @classmethod
    def from_edges(
        cls,
        frame_index: int,
        edges: Iterable[tuple[str, str, int]],
        nodes: Iterable[str] = (),
        activity_counts: Mapping[str, tuple[int, int]] | None = None,
    ) -> "FrameGraph":
        """Build a graph from ``(u, v, weight)`` triples plus extra isolated nodes.

        Repeated pairs accumulate weight.  The two endpoint orders are
        interchangeable.
        """
        adj: dict[str, dict[str, int]] = {v: {} for v in nodes}
        for u, v, w in edges:
            if u == v:
                raise ValueError(f"self-loop on node {u!r}")
            adj.setdefault(u, {})
            adj.setdefault(v, {})
            adj[u][v] = adj[u].get(v, 0) + w
            adj[v][u] = adj[v].get(u, 0) + w
        return cls(frame_index, adj, activity_counts)

    # -- read access ---------------------------------------------------------

    def __len__(self) -> int:
        return len(self._adj)

    def __contains__(self, node: str) -> bool:
        return node in self._adj

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FrameGraph):
            return NotImplemented
        return (
            self.frame_index == other.frame_index
            and self._adj == other._adj
            and self._counts == other._counts
        )

    @property
    def nodes(self) -> Sequence[str]:
        """Node identifiers in sorted order."""
        return list(self._adj)

    @property
    def edge_count(self) -> int:
        return sum(len(r) for r in self._adj.values()) // 2

    @property
    def total_weight(self) -> int:
        """Sum of edge weights, each undirected edge counted once."""
        return self._total_weight

    def neighbors(self, node: str) -> Mapping[str, int]:
        return self._adj[node]

    def degree(self, node: str) -> int:
        """Number of distinct neighbours."""
        return len(self._adj[node])

    def strength(self, node: str) -> int:
        """Sum of incident edge weights."""
        return sum(self._adj[node].values())

    def weight(self, u: str, v: str, default: int = 0) -> int:
        row = self._adj.get(u)
        return default if row is None else row.get(v, default)

    def activity_counts(self, node: str) -> tuple[int, int]:
        """(rewarding, non_rewarding) participation counts for ``node``."""
        return self._counts[node]

    def edges(self) -> Iterator[tuple[str, str, int]]:
        """Yield each undirected edge once as ``(u, v, w)`` with ``u < v``."""
        for u, row in self._adj.items():
            for v, w in row.items():
                if u < v:
                    yield u, v, w

    def restrict(self, keep: Iterable[str]) -> "FrameGraph":
        """Induced subgraph on ``keep`` (unknown ids are ignored).

        Restriction composes: restricting to A then to B equals restricting
        to the intersection of A and B.
        """
        keep_set = set(keep) & self._adj.keys()
        adj = {
            u: {v: w for v, w in row.items() if v in keep_set}
            for u, row in self._adj.items()
            if u in keep_set
        }
        counts = {v: self._counts[v] for v in adj}
        return FrameGraph(self.frame_index, adj, counts)


class DynamicNetwork:
    """Ordered sequence of frame snapshots over a fixed member registry."""

    __slots__ = ("frames", "spec", "members")

    def __init__(
        self,
        frames: Sequence[FrameGraph],
        spec: "FrameSpec | None" = None,
        members: Iterable[str] | None = None,
    ) -> None:
        self.frames = list(frames)
        for t, frame in enumerate(self.frames):
            if frame.frame_index != t:
                raise ValueError(
                    f"frame at position {t} carries index {frame.frame_index}"
                )
        self.spec = spec
        if members is None:
            members = set()
            for frame in self.frames:
                members.update(frame._adj)
        self.members = frozenset(members)

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def frame_count(self) -> int:
        return len(self.frames)


def aggregate(network: DynamicNetwork) -> FrameGraph:
    """Collapse all frames into one graph; pair weights add across frames.

    The result carries frame index ``AGGREGATE_FRAME`` (-1) and the union of
    all per-frame activity counts, and registers every member of the network
    registry (so members seen only in singleton teams stay represented).
    """
    adj: dict[str, dict[str, int]] = {v: {} for v in network.members}
    counts: dict[str, list[int]] = {v: [0, 0] for v in network.members}
    for frame in network.frames:
        for u, v, w in frame.edges():
            adj[u][v] = adj[u].get(v, 0) + w
            adj[v][u] = adj[v].get(u, 0) + w
        for node in frame._adj:
            a, b = frame.activity_counts(node)
            counts[node][0] += a
            counts[node][1] += b
    packed = {v: (a, b) for v, (a, b) in counts.items()}
    return FrameGraph(AGGREGATE_FRAME, adj, packed)


def _hop_distances(adj: Mapping[str, Mapping[str, int]], source: str) -> dict[str, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        node = queue.popleft()
        d = dist[node] + 1
        for nxt in adj[node]:
            if nxt not in dist:
                dist[nxt] = d
                queue.append(nxt)
    return dist

def closeness(graph: FrameGraph, node: str) -> float:
    """Closeness of one node on the unweighted topology.

    Defined as (r / (n - 1)) * (r / s) where r is the number of other nodes
    reachable from ``node``, s the sum of hop distances to them, and n the
    graph's node count.  Isolated nodes (and the single-node graph) score 0.
    """
    if node not in graph:
        raise ValueError(f"unknown node {node!r}")
    n = len(graph)
    if n <= 1:
        return 0.0
    dist = _hop_distances(graph._adj, node)
    reach = len(dist) - 1
    if reach == 0:
        return 0.0
    total = sum(dist.values())
    return (reach / (n - 1)) * (reach / total)


def closeness_all(graph: FrameGraph, chunk: int = 512) -> dict[str, float]:
    """Closeness for every node at once.

    Functionally identical to calling :func:`closeness` per node, but the
    breadth-first sweeps run through scipy's compiled shortest-path kernel so
    the full aggregate graph stays cheap.  ``chunk`` bounds the number of
    simultaneous source rows to keep the distance matrix small.
    """
    import numpy as np
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import dijkstra

    order = list(graph._adj)
    n = len(order)
    if n == 0:
        return {}
    if n == 1:
        return {order[0]: 0.0}
    index = {v: i for i, v in enumerate(order)}
    rows: list[int] = []
    cols: list[int] = []
    for u, v, _w in graph.edges():
        rows.append(index[u])
        cols.append(index[v])
    data = np.ones(len(rows), dtype=np.int8)
    matrix = csr_matrix((data, (rows, cols)), shape=(n, n))
    result: dict[str, float] = {}
    for start in range(0, n, chunk):
        sources = list(range(start, min(start + chunk, n)))
        dist = dijkstra(matrix, directed=False, unweighted=True, indices=sources)
        finite = np.isfinite(dist)
        reach = finite.sum(axis=1) - 1
        sums = np.where(finite, dist, 0.0).sum(axis=1)
        for sub, i in enumerate(sources):
            r = int(reach[sub])
            if r <= 0:
                result[order[i]] = 0.0
            else:
                result[order[i]] = (r / (n - 1)) * (r / sums[sub])
    return result


def write_edge_csv(path, frames: Iterable[FrameGraph]) -> None:
    """Dump frames as ``frame,node_a,node_b,weight`` rows, sorted."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["frame", "node_a", "node_b", "weight"])
        for frame in frames:
            for u, v, w in frame.edges():
                writer.writerow([frame.frame_index, u, v, w])


def read_edge_csv(path) -> dict[int, FrameGraph]:
    """Rebuild per-frame graphs from a :func:`write_edge_csv` dump.

    Isolated nodes are not representable in the edge-list format, so frames
    come back without them.
    """
    edges_by_frame: dict[int, list[tuple[str, str, int]]] = {}
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != ["frame", "node_a", "node_b", "weight"]:
            raise ValueError(f"unexpected header {header!r} in {path}")
        for row in reader:
            frame, u, v, w = row
            edges_by_frame.setdefault(int(frame), []).append((u, v, int(w)))
    return {
        t: FrameGraph.from_edges(t, edges)
        for t, edges in sorted(edges_by_frame.items())
    }
