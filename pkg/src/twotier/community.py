"""Community structure: weighted modularity and greedy two-phase detection.

Detection follows the usual two-phase scheme — local single-node moves until
no gain remains, then collapsing communities into super-nodes and repeating —
plus a final node-level refinement pass on the original graph, so the
returned partition is locally optimal: no single node can move to another
community (or isolate itself) and raise Q.  All randomness comes from one
seeded generator; runs are reproducible.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .graph import FrameGraph

_EPS = 1e-12
_MAX_SWEEPS = 100


def modularity(graph: FrameGraph, assignment: Mapping[str, int]) -> float:
    """Weighted modularity Q of a node-to-community assignment.

    Q sums, over communities, the internal weight fraction minus the squared
    fraction of total strength: Q = sum_c [in_c/(2m) - (tot_c/(2m))^2] where
    in_c counts ordered intra-community pairs.  Self-weights are zero by
    graph construction.

    Raises:
        ValueError: if the graph has no edges (Q is undefined) or the
            assignment does not cover exactly the graph's nodes.
    """
    if set(assignment) != set(graph.nodes):
        raise ValueError("assignment must cover exactly the graph's nodes")
    m2 = 2.0 * graph.total_weight
    if m2 == 0:
        raise ValueError("modularity is undefined for an edgeless graph")
    internal: dict[int, float] = {}
    tot: dict[int, float] = {}
    for node in graph.nodes:
        c = assignment[node]
        tot[c] = tot.get(c, 0.0) + graph.strength(node)
    for u, v, w in graph.edges():
        if assignment[u] == assignment[v]:
            c = assignment[u]
            internal[c] = internal.get(c, 0.0) + 2.0 * w
    q = 0.0
    for c in sorted(tot):
        q += internal.get(c, 0.0) / m2 - (tot[c] / m2) ** 2
    return q


@dataclass(frozen=True)
class Partition:
    """A detected partition of one frame.

    ``assignment`` maps member -> community id; ids are dense integers
    0..C-1 ordered by each community's smallest member id.  ``degenerate``
    flags frames where Q was undefined (edgeless) and the all-singletons
    fallback was used.
    """

    frame_index: int
    assignment: dict[str, int]
    q: float
    degenerate: bool = False

    @property
    def community_count(self) -> int:
        return max(self.assignment.values(), default=-1) + 1

    def communities(self) -> list[frozenset[str]]:
        """Member sets indexed by community id."""
        groups: list[set[str]] = [set() for _ in range(self.community_count)]
        for node, c in self.assignment.items():
            groups[c].add(node)
        return [frozenset(g) for g in groups]


def _renumber(assignment: Mapping[str, int]) -> dict[str, int]:
    """Relabel communities as 0..C-1 ordered by smallest member id."""
    smallest: dict[int, str] = {}
    for node, c in assignment.items():
        if c not in smallest or node < smallest[c]:
            smallest[c] = node
    order = sorted(smallest, key=lambda c: smallest[c])
    remap = {c: i for i, c in enumerate(order)}
    return {node: remap[c] for node, c in sorted(assignment.items())}


def _one_level(
    adj: list[dict[int, float]],
    loop: list[float],
    k: list[float],
    m2: float,
    rng: random.Random,
    resolution: float,
) -> tuple[list[int], bool]:
    """Local-move phase on the current level graph; returns (communities, moved)."""
    n = len(adj)
    com = list(range(n))
    tot = list(k)
    order = list(range(n))
    rng.shuffle(order)
    moved_any = False
    for _sweep in range(_MAX_SWEEPS):
        moves = 0
        for v in order:
            cv = com[v]
            nbw: dict[int, float] = {}
            for u, w in adj[v].items():
                cu = com[u]
                nbw[cu] = nbw.get(cu, 0.0) + w
            # gains are relative to v sitting alone outside any community
            tot[cv] -= k[v]
            stay = nbw.get(cv, 0.0) - resolution * k[v] * tot[cv] / m2
            best_c, best_gain = cv, stay
            for c in sorted(nbw):
                if c == cv:
                    continue
                gain = nbw[c] - resolution * k[v] * tot[c] / m2
                if gain > best_gain + _EPS or (
                    gain > best_gain - _EPS and best_c != cv and c < best_c
                ):
                    best_c, best_gain = c, gain
            com[v] = best_c
            tot[best_c] += k[v]
            if best_c != cv:
                moves += 1
                moved_any = True
        if moves == 0:
            break
    return com, moved_any


def _collapse(
    adj: list[dict[int, float]],
    loop: list[float],
    com: list[int],
) -> tuple[list[dict[int, float]], list[float], list[float]]:
    """Aggregate the level graph by its communities."""
    labels = sorted(set(com))
    remap = {lab: i for i, lab in enumerate(labels)}
    size = len(labels)
    new_adj: list[dict[int, float]] = [{} for _ in range(size)]
    new_loop = [0.0] * size
    for v, row in enumerate(adj):
        cv = remap[com[v]]
        new_loop[cv] += loop[v]
        for u, w in row.items():
            cu = remap[com[u]]
            if cu == cv:
                if u > v:
                    new_loop[cv] += w
            else:
                new_adj[cv][cu] = new_adj[cv].get(cu, 0.0) + w
    new_k = [sum(new_adj[i].values()) + 2.0 * new_loop[i] for i in range(size)]
    return new_adj, new_loop, new_k


def _refine(
    graph: FrameGraph, assignment: dict[str, int], resolution: float, m2: float
) -> dict[str, int]:
    """Node-level polish on the original graph.

    Sweeps every node (sorted order) and applies any strictly improving move
    to a neighbouring community or to a fresh singleted community, until a
    full sweep makes no move.  Guarantees local optimality under single-node
    moves, which the collapsed phases alone do not.
    """
    com = dict(assignment)
    tot: dict[int, float] = {}
    strength = {v: float(graph.strength(v)) for v in graph.nodes}
    for v, c in com.items():
        tot[c] = tot.get(c, 0.0) + strength[v]
    next_label = max(com.values(), default=-1) + 1
    for _sweep in range(_MAX_SWEEPS):
        moves = 0
        for v in graph.nodes:
            cv = com[v]
            nbw: dict[int, float] = {}
            for u, w in graph.neighbors(v).items():
                cu = com[u]
                nbw[cu] = nbw.get(cu, 0.0) + w
            tot[cv] -= strength[v]
            stay = nbw.get(cv, 0.0) - resolution * strength[v] * tot[cv] / m2
            best_c, best_gain = cv, stay
            for c in sorted(nbw):
                if c == cv:
                    continue
                gain = nbw[c] - resolution * strength[v] * tot[c] / m2
                if gain > best_gain + _EPS or (
                    gain > best_gain - _EPS and best_c != cv and c < best_c
                ):
                    best_c, best_gain = c, gain
            if best_gain < -_EPS:
                # isolating v (gain exactly 0) beats every existing option
                best_c, best_gain = next_label, 0.0
            com[v] = best_c
            tot[best_c] = tot.get(best_c, 0.0) + strength[v]
            if best_c != cv:
                moves += 1
                if best_c == next_label:
                    next_label += 1
        if moves == 0:
            break
    return com


def detect(graph: FrameGraph, seed: int = 42, resolution: float = 1.0) -> Partition:
    """Detect communities in one frame graph.

    Edgeless graphs (including the empty graph) cannot be scored, so they
    yield the all-singletons partition with Q = 0 and ``degenerate=True``.
    Isolated nodes in an otherwise connected graph always end up as
    singleton communities, keeping them addressable downstream.
    """
    nodes = graph.nodes
    if graph.edge_count == 0:
        assignment = {v: i for i, v in enumerate(nodes)}
        return Partition(graph.frame_index, assignment, 0.0, degenerate=True)
    index = {v: i for i, v in enumerate(nodes)}
    adj: list[dict[int, float]] = [
        {index[u]: float(w) for u, w in graph.neighbors(v).items()} for v in nodes
    ]
    loop = [0.0] * len(nodes)
    k = [float(graph.strength(v)) for v in nodes]
    m2 = 2.0 * graph.total_weight
    rng = random.Random(seed)
    chain = list(range(len(nodes)))
    while True:
        com, moved = _one_level(adj, loop, k, m2, rng, resolution)
        labels = sorted(set(com))
        remap = {lab: i for i, lab in enumerate(labels)}
        chain = [remap[com[cur]] for cur in chain]
        if not moved or len(labels) == len(adj):
            break
        adj, loop, k = _collapse(adj, loop, com)
    assignment = {nodes[i]: chain[i] for i in range(len(nodes))}
    assignment = _refine(graph, assignment, resolution, m2)
    assignment = _renumber(assignment)
    return Partition(graph.frame_index, assignment, modularity(graph, assignment))


@dataclass
class FramePartitionSet:
    """Partitions for every frame of a sub-network plus summary statistics.

    ``average_q`` is the mean Q over analyzed frames (frames holding at
    least one node); degenerate frames contribute 0.  Frames with no nodes
    are skipped from the average but still get an (empty) partition so frame
    indices stay aligned.
    """

    partitions: list[Partition]
    average_q: float
    analyzed_frames: list[int]
    degenerate_frames: list[int] = field(default_factory=list)


def detect_all(
    frames: Sequence[FrameGraph], seed: int = 42, resolution: float = 1.0
) -> FramePartitionSet:
    """Run detection over a frame sequence with per-frame derived seeds."""
    partitions = []
    analyzed = []
    degenerate = []
    for frame in frames:
        part = detect(frame, seed=seed + 1000003 * (frame.frame_index + 1),
                      resolution=resolution)
        partitions.append(part)
        if len(frame) > 0:
            analyzed.append(frame.frame_index)
            if part.degenerate:
                degenerate.append(frame.frame_index)
    if analyzed:
        average = sum(partitions[t].q for t in analyzed) / len(analyzed)
    else:
        average = 0.0
    return FramePartitionSet(partitions, average, analyzed, degenerate)


def write_partition_csv(path, partitions: Iterable[Partition]) -> None:
    """Dump partitions as frame,member_id,community_id rows, sorted."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["frame", "member_id", "community_id"])
        for part in partitions:
            for member in sorted(part.assignment):
                writer.writerow([part.frame_index, member, part.assignment[member]])


def read_partition_csv(path) -> dict[int, dict[str, int]]:
    """Rebuild frame -> assignment mappings from a partition dump."""
    frames: dict[int, dict[str, int]] = {}
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != ["frame", "member_id", "community_id"]:
            raise ValueError(f"unexpected header {header!r} in {path}")
        for frame, member, community in reader:
            frames.setdefault(int(frame), {})[member] = int(community)
    return frames
