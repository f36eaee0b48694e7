"""Signed-graph core: data structures, triangles, frustration accounting."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

PARTY_CODES = ("D", "R", "I")
_PARTY_ALIASES = {
    "D": "D", "DEM": "D", "DEMOCRAT": "D",
    "R": "R", "REP": "R", "REPUBLICAN": "R",
    "I": "I", "IND": "I", "INDEPENDENT": "I",
}


class GraphFormatError(ValueError):
    """Raised for malformed graph input (bad signs, duplicates, parse errors)."""


@dataclass(frozen=True)
class Partition:
    """Binary node assignment: bits[i] = 1 iff node i is in group X."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("partition entries must be 0 or 1")

    def __len__(self) -> int:
        return len(self.bits)

    def complement(self) -> "Partition":
        return Partition(tuple(1 - b for b in self.bits))

    def groups(self, g: "SignedGraph") -> tuple[frozenset, frozenset]:
        """Node-id sets (group 0, group 1)."""
        g0 = frozenset(g.nodes[i] for i, b in enumerate(self.bits) if b == 0)
        g1 = frozenset(g.nodes[i] for i, b in enumerate(self.bits) if b == 1)
        return g0, g1

    def as_array(self) -> np.ndarray:
        return np.asarray(self.bits, dtype=np.int8)

    @classmethod
    def from_group(cls, g: "SignedGraph", members: Iterable[str]) -> "Partition":
        """Partition with the given node ids in group 1, everything else in group 0."""
        member_set = set(members)
        unknown = member_set - set(g.nodes)
        if unknown:
            raise ValueError(f"unknown nodes in group: {sorted(unknown)}")
        return cls(tuple(1 if v in member_set else 0 for v in g.nodes))


@dataclass(frozen=True)
class TriangleSet:
    """All (i, j, k) index triples, i < j < k, whose three pairwise edges exist."""

    triples: tuple[tuple[int, int, int], ...]

    @property
    def count(self) -> int:
        return len(self.triples)


@dataclass(frozen=True)
class NodeAttributes:
    """Per-node party labels (D/R/I) plus optional free-form metadata."""

    party: dict[str, str]
    metadata: dict[str, dict[str, str]] = field(default_factory=dict)

    @staticmethod
    def normalize_party(label: str) -> str:
        code = _PARTY_ALIASES.get(label.strip().upper())
        if code is None:
            raise ValueError(f"unknown party label {label!r} (expected one of D/R/I)")
        return code


class SignedGraph:
    """Undirected graph with edge signs in {-1, +1}.

    Nodes are opaque string identifiers mapped to dense indices 0..n-1 in
    first-appearance order. Immutable after construction; safe to share
    across workers.
    """

    def __init__(self, nodes: Sequence[str], edges: Iterable[tuple[int, int, int]]):
        """Internal constructor over dense indices; prefer `from_edge_list`."""
        self.nodes: tuple[str, ...] = tuple(nodes)
        if len(set(self.nodes)) != len(self.nodes):
            raise GraphFormatError("duplicate node identifiers")
        if not self.nodes:
            raise GraphFormatError("graph must have at least one node")
        self.index: dict[str, int] = {v: i for i, v in enumerate(self.nodes)}
        n = len(self.nodes)

        eu, ev, es = [], [], []
        seen: dict[tuple[int, int], int] = {}
        for i, j, s in edges:
            if s not in (-1, 1):
                raise GraphFormatError(f"edge sign must be -1 or +1, got {s!r}")
            if i == j:
                raise GraphFormatError(f"self-loop at node {self.nodes[i]!r}")
            if not (0 <= i < n and 0 <= j < n):
                raise GraphFormatError("edge endpoint out of range")
            a, b = (i, j) if i < j else (j, i)
            if (a, b) in seen:
                prev = seen[(a, b)]
                pair = (self.nodes[a], self.nodes[b])
                if prev != s:
                    raise GraphFormatError(f"conflicting signs for edge {pair}")
                raise GraphFormatError(f"duplicate edge {pair}")
            seen[(a, b)] = s
            eu.append(a)
            ev.append(b)
            es.append(s)

        self.edge_u = np.asarray(eu, dtype=np.int32)
        self.edge_v = np.asarray(ev, dtype=np.int32)
        self.edge_sign = np.asarray(es, dtype=np.int8)
        for arr in (self.edge_u, self.edge_v, self.edge_sign):
            arr.setflags(write=False)
        self.edge_id: dict[tuple[int, int], int] = {
            (a, b): k for k, (a, b) in enumerate(zip(eu, ev))
        }

        nbrs: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for a, b, s in zip(eu, ev, es):
            nbrs[a].append((b, s))
            nbrs[b].append((a, s))
        self.neighbors: tuple[np.ndarray, ...] = tuple(
            np.asarray(sorted(v for v, _ in lst), dtype=np.int32) for lst in nbrs
        )
        self.neighbor_signs: tuple[dict[int, int], ...] = tuple(
            {v: s for v, s in lst} for lst in nbrs
        )

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edge_sign)

    @property
    def positive_edge_count(self) -> int:
        return int((self.edge_sign > 0).sum())

    @property
    def negative_edge_count(self) -> int:
        return int((self.edge_sign < 0).sum())

    @property
    def density(self) -> float:
        n = self.node_count
        return 0.0 if n < 2 else 2.0 * self.edge_count / (n * (n - 1))

    def sign(self, u: str, v: str) -> int:
        """Sign of edge (u, v); raises if the edge is absent."""
        k = self._edge_key(u, v)
        return int(self.edge_sign[self.edge_id[k]])

    def has_edge(self, u: str, v: str) -> bool:
        try:
            return self._edge_key(u, v) in self.edge_id
        except KeyError:
            return False

    def _edge_key(self, u: str, v: str) -> tuple[int, int]:
        i, j = self.index[u], self.index[v]
        return (i, j) if i < j else (j, i)

    def edge_list(self) -> list[tuple[str, str, int]]:
        """Edges as (source id, target id, sign) in storage order."""
        return [
            (self.nodes[a], self.nodes[b], int(s))
            for a, b, s in zip(self.edge_u, self.edge_v, self.edge_sign)
        ]

    def adjacency_matrix(self, signed: bool = True) -> np.ndarray:
        """Dense symmetric adjacency; entries are the signs (or 0/1 if unsigned)."""
        n = self.node_count
        a = np.zeros((n, n), dtype=np.int64)
        vals = self.edge_sign if signed else np.abs(self.edge_sign)
        a[self.edge_u, self.edge_v] = vals
        a[self.edge_v, self.edge_u] = vals
        return a

    def __repr__(self) -> str:
        return (
            f"SignedGraph(n={self.node_count}, m={self.edge_count}, "
            f"m+={self.positive_edge_count}, m-={self.negative_edge_count})"
        )


def from_edge_list(
    rows: Iterable[tuple[str, str, int]], nodes: Sequence[str] = ()
) -> SignedGraph:
    """Build a SignedGraph from (source, target, sign) rows.

    Node indices follow first appearance; `nodes` pre-declares identifiers
    (allowing isolated nodes) ahead of any that appear in edges. Duplicate
    edges are rejected outright: a conflicting sign means contradictory
    input, an identical sign means corrupted input upstream.
    """
    order: list[str] = []
    index: dict[str, int] = {}

    def intern(v) -> int:
        if not isinstance(v, str) or not v:
            raise GraphFormatError(f"node id must be a nonempty string, got {v!r}")
        if v not in index:
            index[v] = len(order)
            order.append(v)
        return index[v]

    for v in nodes:
        intern(v)
    triples = []
    for u, v, s in rows:
        triples.append((intern(u), intern(v), s))
    if not order:
        raise GraphFormatError("empty edge list and no declared nodes")
    return SignedGraph(order, triples)


def enumerate_triangles(g: SignedGraph) -> TriangleSet:
    """All triangles of g, in lexicographic (i, j, k) order.

    Intersects sorted neighbor lists per edge, so cost scales with the sum
    over edges of min-degree rather than n^3.
    """
    triples: list[tuple[int, int, int]] = []
    adj = g.neighbors
    for a, b in zip(g.edge_u, g.edge_v):
        common = np.intersect1d(adj[a], adj[b], assume_unique=True)
        for c in common[common > b]:
            triples.append((int(a), int(b), int(c)))
    triples.sort()
    return TriangleSet(tuple(triples))


def triangle_signs(g: SignedGraph, t: TriangleSet) -> np.ndarray:
    """Sign product (+1/-1) of each triangle in t."""
    out = np.empty(t.count, dtype=np.int8)
    for k, (i, j, l) in enumerate(t.triples):
        out[k] = (
            g.edge_sign[g.edge_id[(i, j)]]
            * g.edge_sign[g.edge_id[(i, l)]]
            * g.edge_sign[g.edge_id[(j, l)]]
        )
    return out


def frustration_state(g: SignedGraph, p: Partition, edge: tuple[str, str]) -> int:
    """1 if the edge is frustrated under p, else 0.

    A positive edge is frustrated when its endpoints are split; a negative
    edge when they share a group.
    """
    u, v = edge
    try:
        key = g._edge_key(u, v)
        eid = g.edge_id[key]
    except KeyError:
        raise ValueError(f"edge ({u!r}, {v!r}) not in graph") from None
    _check_partition(g, p)
    i, j = key
    cross = p.bits[i] != p.bits[j]
    s = int(g.edge_sign[eid])
    return int(cross if s == 1 else not cross)


def frustration_count(g: SignedGraph, p: Partition) -> int:
    """Number of frustrated edges of g under partition p."""
    _check_partition(g, p)
    x = p.as_array()
    cross = x[g.edge_u] != x[g.edge_v]
    frustrated = np.where(g.edge_sign == 1, cross, ~cross)
    return int(frustrated.sum())


def _check_partition(g: SignedGraph, p: Partition) -> None:
    if len(p) != g.node_count:
        raise ValueError(
            f"partition length {len(p)} != node count {g.node_count}"
        )


def is_balanced(g: SignedGraph) -> tuple[bool, Partition | None]:
    """Whether some partition has zero frustrated edges; witness if so.

    Two-coloring propagation: a positive edge forces equal colors, a
    negative edge opposite colors. Each component is rooted (color 0) at
    its smallest node index, so the witness is deterministic.
    """
    n = g.node_count
    color = [-1] * n
    for root in range(n):
        if color[root] != -1:
            continue
        color[root] = 0
        stack = [root]
        while stack:
            u = stack.pop()
            for v, s in g.neighbor_signs[u].items():
                want = color[u] if s == 1 else 1 - color[u]
                if color[v] == -1:
                    color[v] = want
                    stack.append(v)
                elif color[v] != want:
                    return False, None
    return True, Partition(tuple(color))


def switch(g: SignedGraph, cut: Partition) -> SignedGraph:
    """Negate the sign of every edge crossing the cut; nodes and edges kept.

    Switching preserves the frustration index: argmin partitions map by
    XOR with the cut.
    """
    _check_partition(g, cut)
    x = cut.as_array()
    cross = x[g.edge_u] != x[g.edge_v]
    new_signs = np.where(cross, -g.edge_sign, g.edge_sign)
    return SignedGraph(
        g.nodes,
        zip(g.edge_u.tolist(), g.edge_v.tolist(), new_signs.tolist()),
    )
