"""Delegation-network statistics and their daily time series.

The network view collapses parallel delegations (same truster and trustee
in several scopes) to one directed edge.  Reciprocity is the share of
edges with a reverse edge; clustering is the global transitivity
(3 * triangles / wedges) of the undirected projection; the largest
component ignores edge directions.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Iterable, Sequence

from .delegation import DelegationEdge, delegation_graph_at
from .fitting import gini


@dataclass(frozen=True)
class DelegationGraph:
    """Directed delegation graph without self-loops or parallel edges."""

    nodes: frozenset[str]
    edges: frozenset[tuple[str, str]]

    def __post_init__(self):
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop at {u!r}")
        covered = {u for u, _ in self.edges} | {v for _, v in self.edges}
        if not covered <= self.nodes:
            object.__setattr__(self, "nodes", self.nodes | covered)

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str]],
                   nodes: Iterable[str] = ()) -> "DelegationGraph":
        return cls(frozenset(nodes), frozenset(edges))

    @classmethod
    def from_delegations(cls, delegations: Iterable[DelegationEdge]) -> "DelegationGraph":
        return cls.from_edges((d.truster, d.trustee) for d in delegations)

    def indegrees(self) -> dict[str, int]:
        deg = {n: 0 for n in self.nodes}
        for _, v in self.edges:
            deg[v] += 1
        return deg


def reciprocity(graph: DelegationGraph) -> float | None:
    """Share of edges whose reverse edge also exists; None for no edges."""
    if not graph.edges:
        return None
    mutual = sum(1 for u, v in graph.edges if (v, u) in graph.edges)
    return mutual / len(graph.edges)


def clustering_coefficient(graph: DelegationGraph) -> float | None:
    """Global transitivity of the undirected projection.

    3 * triangles / wedges, i.e. the probability that two neighbours of a
    node are themselves connected.  None when the projection has no wedge.
    """
    neighbours: dict[str, set[str]] = {n: set() for n in graph.nodes}
    for u, v in graph.edges:
        neighbours[u].add(v)
        neighbours[v].add(u)
    wedges = sum(len(ns) * (len(ns) - 1) // 2 for ns in neighbours.values())
    if wedges == 0:
        return None
    closed = 0  # each triangle counted once per corner = 3 times in total
    for node, ns in neighbours.items():
        for a in ns:
            # count pairs once per corner: a < b in iteration order
            closed += sum(1 for b in ns if a < b and b in neighbours[a])
    return closed / wedges


def largest_component(graph: DelegationGraph) -> int:
    """Node count of the largest weakly connected component (0 if empty)."""
    neighbours: dict[str, set[str]] = {n: set() for n in graph.nodes}
    for u, v in graph.edges:
        neighbours[u].add(v)
        neighbours[v].add(u)
    seen: set[str] = set()
    best = 0
    for start in graph.nodes:
        if start in seen:
            continue
        stack = [start]
        seen.add(start)
        size = 0
        while stack:
            node = stack.pop()
            size += 1
            for nxt in neighbours[node]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        best = max(best, size)
    return best


@dataclass(frozen=True)
class DailyStats:
    date: datetime
    edges_added: int
    edges_removed: int
    active_delegations: int
    indegree_gini: float | None
    reciprocity: float | None
    clustering: float | None
    largest_component: int


def stats_time_series(edge_log: Sequence[DelegationEdge],
                      positive_indegree_only: bool = False) -> list[DailyStats]:
    """One row per day at 00:00 UTC from the first to the last day touched.

    Added/removed counts compare raw log entries active on consecutive
    snapshots; the network statistics use the deduplicated graph.  The
    Gini is over the indegrees of all nodes present in the snapshot, or
    only nodes with at least one incoming delegation when
    positive_indegree_only is set.
    """
    if not edge_log:
        return []
    starts = [e.valid_from for e in edge_log if e.valid_from is not None]
    ends = [e.valid_to for e in edge_log if e.valid_to is not None]
    if not starts:
        return []
    first = min(starts)
    last = max(ends + starts)
    day = datetime(first.year, first.month, first.day)
    stop = datetime(last.year, last.month, last.day) + timedelta(days=1)

    rows = []
    previous: set[int] = set()
    while day <= stop:
        active = {i for i, e in enumerate(edge_log) if e.active_at(day)}
        snapshot = delegation_graph_at(edge_log, day)
        graph = DelegationGraph.from_delegations(snapshot.edges)
        deg = graph.indegrees()
        values = [d for d in deg.values() if d > 0] if positive_indegree_only \
            else list(deg.values())
        g = gini(values) if values and sum(values) > 0 else None
        rows.append(DailyStats(
            date=day,
            edges_added=len(active - previous),
            edges_removed=len(previous - active),
            active_delegations=len(active),
            indegree_gini=g,
            reciprocity=reciprocity(graph),
            clustering=clustering_coefficient(graph),
            largest_component=largest_component(graph),
        ))
        previous = active
        day += timedelta(days=1)
    return rows
