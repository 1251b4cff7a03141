"""Weighted k-shell decomposition, per-frame influence and backbone selection.

A node's weighted degree combines how many neighbours it has with how much
weight sits on those edges.  Shell decomposition repeatedly peels the nodes
whose current weighted degree falls at or below the running shell index; a
node's shell is the index at which it was peeled.  Running the decomposition
frame by frame and summing the shells a member earned while present gives a
time-aware influence score, which drives backbone selection.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .graph import DynamicNetwork, FrameGraph, aggregate


def weighted_degree_value(degree: int, weight_sum: int) -> int:
    """round(sqrt(degree * weight_sum)) with half-away-from-zero rounding.

    Computed in exact integer arithmetic (no float sqrt), so large inputs
    cannot drift.  The square root of an integer is never exactly halfway
    between two integers, so the tie direction never actually fires; it is
    pinned anyway for the contract's sake.
    """
    if degree < 0 or weight_sum < 0:
        raise ValueError("degree and weight_sum must be non-negative")
    product = degree * weight_sum
    root = math.isqrt(product)
    # product > (root + 1/2)^2  <=>  product - root^2 > root (integers)
    return root + 1 if product - root * root > root else root


def weighted_degree(graph: FrameGraph, node: str) -> int:
    """Weighted degree of ``node`` in ``graph``."""
    return weighted_degree_value(graph.degree(node), graph.strength(node))


@dataclass(frozen=True)
class ShellAssignment:
    """Result of one decomposition: node -> shell index (>= 1)."""

    frame_index: int
    shells: dict[str, int]

    def max_shell(self) -> int:
        return max(self.shells.values(), default=0)

    def distinct_shells(self) -> int:
        return len(set(self.shells.values()))


def wks_decompose(graph: FrameGraph) -> ShellAssignment:
    """Weighted k-shell decomposition of one graph.

    Starting at shell index k = 1, repeatedly remove every node whose
    current weighted degree is <= k (recomputing weighted degrees on the
    trimmed graph after each sweep); when no node qualifies the index grows
    and peeling resumes, until nothing is left.  Nodes removed at index k
    form shell k.  Isolated nodes have weighted degree 0 and land in shell 1.

    Index growth jumps straight to the smallest current weighted degree,
    which is observably identical to stepping by one (sweeps at skipped
    indices remove nothing) but avoids idle passes.
    """
    degree: dict[str, int] = {}
    strength: dict[str, int] = {}
    for node in graph.nodes:
        degree[node] = graph.degree(node)
        strength[node] = graph.strength(node)

    def current(node: str) -> int:
        return weighted_degree_value(degree[node], strength[node])

    alive = set(degree)
    shells: dict[str, int] = {}
    k = 1
    while alive:
        batch = [v for v in alive if current(v) <= k]
        if not batch:
            k = max(k + 1, min(current(v) for v in alive))
            continue
        while batch:
            touched = set()
            for node in batch:
                alive.discard(node)
                shells[node] = k
                for other, w in graph.neighbors(node).items():
                    if other in alive:
                        degree[other] -= 1
                        strength[other] -= w
                        touched.add(other)
            batch = [v for v in sorted(touched) if v in alive and current(v) <= k]
        k += 1
    return ShellAssignment(graph.frame_index, shells)


@dataclass
class InfluenceTable:
    """Per-frame shells and accumulated influence for every registry member.

    ``per_frame`` holds shell indices only for (member, frame) pairs where
    the member was present; absent frames contribute 0 by omission.
    ``tiebreak_degree`` is the member's distinct-neighbour count in the
    aggregate graph.
    """

    frame_count: int
    total: dict[str, int]
    tiebreak_degree: dict[str, int]
    per_frame: dict[tuple[str, int], int] = field(repr=False)

    def influence_at(self, member: str, frame: int) -> int:
        """Shell earned in one frame; 0 when absent."""
        if member not in self.total:
            raise ValueError(f"unknown member {member!r}")
        return self.per_frame.get((member, frame), 0)

    def frames_active(self, member: str) -> int:
        if member not in self.total:
            raise ValueError(f"unknown member {member!r}")
        return sum(1 for (m, _t) in self.per_frame if m == member)

    def ranking(self) -> list[str]:
        """Members ordered by (influence desc, degree desc, id asc)."""
        return sorted(
            self.total,
            key=lambda m: (-self.total[m], -self.tiebreak_degree[m], m),
        )

    def shell_statistics(self) -> dict[str, int]:
        """How finely the scoring separates members.

        ``distinct_influence`` counts distinct accumulated scores;
        ``distinct_rank_keys`` counts distinct (influence, degree) pairs,
        i.e. levels after the tiebreak is applied.
        """
        totals = set(self.total.values())
        keys = {(self.total[m], self.tiebreak_degree[m]) for m in self.total}
        return {
            "distinct_influence": len(totals),
            "distinct_rank_keys": len(keys),
        }


def dynamic_influence(
    network: DynamicNetwork, aggregate_graph: FrameGraph | None = None
) -> InfluenceTable:
    """Frame-by-frame decomposition accumulated into influence scores.

    Every registry member gets a row; members absent from every frame score
    0.  Passing a precomputed aggregate graph avoids rebuilding it.
    """
    if aggregate_graph is None:
        aggregate_graph = aggregate(network)
    total = {m: 0 for m in sorted(network.members)}
    tiebreak = {
        m: (aggregate_graph.degree(m) if m in aggregate_graph else 0)
        for m in total
    }
    per_frame: dict[tuple[str, int], int] = {}
    for frame in network.frames:
        assignment = wks_decompose(frame)
        for member, shell in assignment.shells.items():
            per_frame[(member, frame.frame_index)] = shell
            total[member] = total.get(member, 0) + shell
            if member not in tiebreak:  # member outside the declared registry
                tiebreak[member] = (
                    aggregate_graph.degree(member) if member in aggregate_graph else 0
                )
    return InfluenceTable(
        frame_count=network.frame_count,
        total=total,
        tiebreak_degree=tiebreak,
        per_frame=per_frame,
    )


def aggregate_ranking(aggregate_graph: FrameGraph) -> list[str]:
    """Members of the aggregate graph ordered by the frame-free method:
    (aggregate shell desc, degree desc, id asc)."""
    shells = wks_decompose(aggregate_graph).shells
    return sorted(
        aggregate_graph.nodes,
        key=lambda m: (-shells[m], -aggregate_graph.degree(m), m),
    )


def backbone_size(member_count: int, x: float) -> int:
    """floor(member_count * x / 100), at least 1."""
    if not 0 < x <= 100:
        raise ValueError(f"x must lie in (0, 100], got {x}")
    if member_count < 1:
        raise ValueError("cannot select a backbone from an empty registry")
    return max(1, math.floor(member_count * x / 100.0))


@dataclass
class BackboneSplit:
    """Top-X% backbone vs the rest, with the induced per-frame sub-networks.

    ``bsn_frames``/``gsn_frames`` are the frame graphs induced on backbone
    and general members; ``cross_links`` lists, per frame, the (u, v, weight)
    edges whose endpoints straddle the two groups (canonical pair order).
    """

    x: float
    backbone: frozenset[str]
    general: frozenset[str]
    bsn_frames: list[FrameGraph]
    gsn_frames: list[FrameGraph]
    cross_links: list[list[tuple[str, str, int]]]

    def group_of(self, member: str) -> str:
        if member in self.backbone:
            return "BM"
        if member in self.general:
            return "GM"
        raise ValueError(f"unknown member {member!r}")


def select_backbone(
    table: InfluenceTable, x: float, network: DynamicNetwork
) -> BackboneSplit:
    """Split the registry into backbone members (top X% by influence) and rest.

    Ranking ties break by aggregate degree, then member id, so the split is
    reproducible.  ``x`` must lie in (0, 100]; the backbone always keeps at
    least one member.
    """
    ranked = table.ranking()
    take = backbone_size(len(ranked), x)
    backbone = frozenset(ranked[:take])
    general = frozenset(ranked[take:])
    bsn = [f.restrict(backbone) for f in network.frames]
    gsn = [f.restrict(general) for f in network.frames]
    cross: list[list[tuple[str, str, int]]] = []
    for frame in network.frames:
        rows = [
            (u, v, w)
            for u, v, w in frame.edges()
            if (u in backbone) != (v in backbone)
        ]
        cross.append(rows)
    return BackboneSplit(
        x=x,
        backbone=backbone,
        general=general,
        bsn_frames=bsn,
        gsn_frames=gsn,
        cross_links=cross,
    )


def _frame_coverage(graph: FrameGraph, seeds: Iterable[str]) -> float:
    n = len(graph)
    if n == 0:
        raise ValueError("coverage of an empty graph is undefined")
    covered: set[str] = set()
    for seed in seeds:
        if seed in graph:
            covered.add(seed)
            covered.update(graph.neighbors(seed))
    return len(covered) / n


def coverage(target, seeds: Iterable[str], mode: str = "mean") -> float:
    """Fraction of nodes that are a seed or adjacent to one.

    For a single graph this is |seeds union their neighbours| / |nodes|.
    For a dynamic network, ``mode="mean"`` (default) averages the per-frame
    coverages over frames holding at least one node, while ``mode="union"``
    pools the covered sets across frames and divides by the registry size.
    """
    seeds = list(seeds)
    if isinstance(target, FrameGraph):
        return _frame_coverage(target, seeds)
    if not isinstance(target, DynamicNetwork):
        raise TypeError(f"expected FrameGraph or DynamicNetwork, got {type(target)!r}")
    if mode == "mean":
        values = [
            _frame_coverage(frame, seeds) for frame in target.frames if len(frame) > 0
        ]
        if not values:
            raise ValueError("coverage of a network with no populated frames is undefined")
        return sum(values) / len(values)
    if mode == "union":
        if not target.members:
            raise ValueError("coverage of an empty network is undefined")
        covered: set[str] = set()
        for frame in target.frames:
            for seed in seeds:
                if seed in frame:
                    covered.add(seed)
                    covered.update(frame.neighbors(seed))
        return len(covered) / len(target.members)
    raise ValueError(f"unknown coverage mode {mode!r}")


def coverage_curve(
    network: DynamicNetwork,
    method: str,
    x_values: Sequence[float],
    table: InfluenceTable | None = None,
    aggregate_graph: FrameGraph | None = None,
) -> list[tuple[float, float]]:
    """Coverage as a function of the selection percentage X.

    ``method="dwks"`` ranks members by accumulated per-frame influence and
    scores mean per-frame coverage on the dynamic network.
    ``method="wks_aggregate"`` ranks by shells of the aggregate graph and
    scores coverage on that aggregate.  Both use the same seed-count rule
    as backbone selection.
    """
    if method not in ("dwks", "wks_aggregate"):
        raise ValueError(f"unknown ranking method {method!r}")
    if aggregate_graph is None:
        aggregate_graph = aggregate(network)
    if method == "dwks":
        if table is None:
            table = dynamic_influence(network, aggregate_graph)
        ranked = table.ranking()
        target = network
    else:
        ranked = aggregate_ranking(aggregate_graph)
        target = aggregate_graph
    points = []
    for x in x_values:
        take = backbone_size(len(ranked), x)
        points.append((x, coverage(target, ranked[:take])))
    return points


def write_influence_csv(path, table: InfluenceTable) -> None:
    """Dump influence rows: member_id,total_influence,tiebreak_degree,frames_active."""
    active: dict[str, int] = {m: 0 for m in table.total}
    for member, _frame in table.per_frame:
        active[member] += 1
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["member_id", "total_influence", "tiebreak_degree", "frames_active"]
        )
        for member in sorted(table.total):
            writer.writerow(
                [
                    member,
                    table.total[member],
                    table.tiebreak_degree[member],
                    active[member],
                ]
            )


def write_coverage_csv(path, curves: Mapping[str, Sequence[tuple[float, float]]]) -> None:
    """Dump coverage curves as method,x,coverage rows."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["method", "x", "coverage"])
        for method in sorted(curves):
            for x, value in curves[method]:
                writer.writerow([method, x, f"{value:.10f}"])
