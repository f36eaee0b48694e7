"""Exact frustration-index solver: bounds, local search, branch-and-bound.

The pipeline mirrors the bound-then-solve strategy for dense signed graphs:
an upper bound from a (warm-started) local-search partition, a certified
lower bound from the LP relaxation with triangle inequalities (or a greedy
negative-triangle packing as fallback), then depth-first branch-and-bound
that closes the gap and certifies optimality.
"""

from __future__ import annotations

import logging
import math
import sys
import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .graph import (
    NodeAttributes,
    Partition,
    SignedGraph,
    TriangleSet,
    enumerate_triangles,
    frustration_count,
    is_balanced,
    triangle_signs,
)

logger = logging.getLogger("balancekit.solver")

LP_FULL = "lp_full"
LP_ROOT = "lp_root_no_triangles"
TRIANGLE_PACKING = "triangle_packing"

# numerical headroom subtracted from the dual bound so float accumulation
# can never push it above the true LP optimum
_CERTIFY_SLACK = 1e-7

BRUTE_FORCE_MAX_NODES = 20


@dataclass
class BoundConfig:
    """Constraint-tier selection for the LP lower bound.

    tier 0 uses edge constraints only (a valid but weak bound), tier 1 adds
    the four triangle inequalities for triangles containing at least one
    negative edge, tier 2 uses all triangles. "auto" picks tier 1 up to
    `auto_tier_node_limit` nodes and tier 0 above, where the constraint
    matrix would otherwise grow into the tens of millions of rows.
    """

    tier: int | str = "auto"
    auto_tier_node_limit: int = 150
    feasibility_tol: float = 1e-7

    def resolve_tier(self, node_count: int) -> int:
        if self.tier == "auto":
            return 1 if node_count <= self.auto_tier_node_limit else 0
        tier = int(self.tier)
        if tier not in (0, 1, 2):
            raise ValueError(f"bound tier must be 0, 1, or 2, got {tier}")
        return tier


@dataclass
class SolveConfig:
    """Budgets and logging for the exact solve."""

    node_budget: int = 1_000_000
    time_budget: float = 600.0
    log_interval: int = 0  # explored nodes between progress lines; 0 = quiet


@dataclass
class BoundState:
    """Certified bracket on the frustration index plus the best incumbent."""

    lower: float
    upper: int
    incumbent: Partition
    lower_method: str = LP_ROOT

    def __post_init__(self):
        if self.lower > self.upper + 1e-9:
            raise ValueError(
                f"invalid bound state: lower {self.lower} > upper {self.upper}"
            )

    @property
    def lower_int(self) -> int:
        """Smallest integer the frustration index can be."""
        return max(0, math.ceil(self.lower - 1e-12))


@dataclass
class SolveResult:
    frustration_index: int
    optimal_partition: Partition
    proof: BoundState
    node_count_explored: int
    wall_time: float
    certified: bool
    status: str = "optimal"

    def __post_init__(self):
        if not self.certified and "not certified" not in self.status:
            raise ValueError("uncertified result must carry an explicit status")


def warm_start_partition(g: SignedGraph, attrs: NodeAttributes) -> Partition:
    """Initial partition from party labels: Democrats 0, everyone else 1."""
    bits = []
    missing = []
    for v in g.nodes:
        code = attrs.party.get(v)
        if code is None:
            missing.append(v)
        else:
            bits.append(0 if code == "D" else 1)
    if missing:
        raise ValueError(f"warm start missing party attribute for: {missing[:5]}")
    return Partition(tuple(bits))


def local_search_improve(g: SignedGraph, start: Partition) -> Partition:
    """First-improvement single-flip descent to a 1-move-optimal partition.

    Scans nodes in index order, flips whenever moving a node strictly
    reduces the frustration count, and repeats until a full pass makes no
    flip. Deterministic, so repeated runs return the same partition.
    """
    if len(start) != g.node_count:
        raise ValueError("start partition does not cover the graph")
    x = list(start.bits)
    adj = [list(d.items()) for d in g.neighbor_signs]
    improved = True
    while improved:
        improved = False
        for u in range(g.node_count):
            frustrated = 0
            deg = len(adj[u])
            for v, s in adj[u]:
                cross = x[u] != x[v]
                frustrated += cross if s == 1 else (not cross)
            # flipping u toggles every incident edge's state
            if deg - 2 * frustrated < 0:
                x[u] = 1 - x[u]
                improved = True
    return Partition(tuple(x))


def triangle_packing_bound(g: SignedGraph, t: TriangleSet | None = None) -> int:
    """Greedy edge-disjoint packing of negative triangles.

    Every negative triangle forces at least one frustrated edge under any
    partition, and edge-disjointness makes those certificates additive, so
    the pack size is a valid lower bound on the frustration index.
    """
    return len(_pack_negative_triangles(g, t if t is not None else enumerate_triangles(g)))


def _pack_negative_triangles(
    g: SignedGraph, t: TriangleSet
) -> list[tuple[int, int, int]]:
    signs = triangle_signs(g, t)
    used: set[tuple[int, int]] = set()
    pack = []
    for (i, j, k), s in zip(t.triples, signs):
        if s != -1:
            continue
        e = ((i, j), (i, k), (j, k))
        if any(edge in used for edge in e):
            continue
        used.update(e)
        pack.append((i, j, k))
    return pack


def lp_lower_bound(
    g: SignedGraph,
    t: TriangleSet | None = None,
    config: BoundConfig | None = None,
) -> tuple[float, str]:
    """Certified lower bound from the continuous relaxation.

    Variables are x_i per node and x_ij per edge in [0, 1]; the objective
    sums x_i + x_j - 2 x_ij over positive edges and the reflected term over
    negative edges, subject to the edge constraints and (tier-dependent)
    the four triangle inequalities per triangle. The returned value is not
    the raw solver objective: the solver's duals are plugged into the
    Lagrangian over the box, which is a valid bound for *any* nonnegative
    multipliers, then shaved by a small slack. The result is therefore
    trustworthy even if the LP was solved approximately. Returns
    (bound, method); on solver failure falls back to the triangle packing
    bound with the method flagged accordingly.
    """
    config = config or BoundConfig()
    if t is None:
        t = enumerate_triangles(g)
    tier = config.resolve_tier(g.node_count)
    method = LP_FULL if tier >= 1 else LP_ROOT
    n, m = g.node_count, g.edge_count
    if m == 0:
        return 0.0, method

    nv = n + m
    cost = np.zeros(nv)
    constant = 0.0
    for eid in range(m):
        i, j, s = int(g.edge_u[eid]), int(g.edge_v[eid]), int(g.edge_sign[eid])
        k = n + eid
        if s == 1:
            cost[i] += 1.0
            cost[j] += 1.0
            cost[k] -= 2.0
        else:
            cost[i] -= 1.0
            cost[j] -= 1.0
            cost[k] += 2.0
            constant += 1.0

    # constraint rows in "a . x >= rhs" orientation
    data, rows, cols, rhs = [], [], [], []

    def add_row(entries, b):
        r = len(rhs)
        for col, val in entries:
            rows.append(r)
            cols.append(col)
            data.append(val)
        rhs.append(b)

    for eid in range(m):
        i, j, s = int(g.edge_u[eid]), int(g.edge_v[eid]), int(g.edge_sign[eid])
        k = n + eid
        if s == 1:
            add_row([(i, 1.0), (j, 1.0), (k, -2.0)], 0.0)
        else:
            add_row([(i, -1.0), (j, -1.0), (k, 1.0)], -1.0)

    if tier >= 1:
        for (i, j, k) in t.triples:
            eij = n + g.edge_id[(i, j)]
            eik = n + g.edge_id[(i, k)]
            ejk = n + g.edge_id[(j, k)]
            if tier == 1:
                has_neg = (
                    g.edge_sign[g.edge_id[(i, j)]] == -1
                    or g.edge_sign[g.edge_id[(i, k)]] == -1
                    or g.edge_sign[g.edge_id[(j, k)]] == -1
                )
                if not has_neg:
                    continue
            add_row([(i, 1.0), (eij, -1.0), (eik, -1.0), (ejk, 1.0)], 0.0)
            add_row([(j, 1.0), (eij, -1.0), (eik, 1.0), (ejk, -1.0)], 0.0)
            add_row([(k, 1.0), (eij, 1.0), (eik, -1.0), (ejk, -1.0)], 0.0)
            add_row(
                [(i, -1.0), (j, -1.0), (k, -1.0), (eij, 1.0), (eik, 1.0), (ejk, 1.0)],
                -1.0,
            )

    a = sp.csr_matrix(
        (np.asarray(data), (np.asarray(rows), np.asarray(cols))),
        shape=(len(rhs), nv),
    )
    b = np.asarray(rhs)
    res = linprog(
        cost,
        A_ub=-a,
        b_ub=-b,
        bounds=(0.0, 1.0),
        method="highs",
        options={"primal_feasibility_tolerance": config.feasibility_tol},
    )
    if not res.success or res.ineqlin is None:
        logger.warning("LP solve failed (%s); falling back to triangle packing", res.message)
        return float(triangle_packing_bound(g, t)), TRIANGLE_PACKING

    # Lagrangian certificate: for any y >= 0,
    #   min over the box of c.x + y.(b - A x)  =  y.b + sum_j min(0, (c - A'y)_j)
    y = np.clip(-np.asarray(res.ineqlin.marginals), 0.0, None)
    reduced = cost - a.T @ y
    bound = float(y @ b + np.minimum(reduced, 0.0).sum() + constant) - _CERTIFY_SLACK
    return max(bound, 0.0), method


def compute_bounds(
    g: SignedGraph,
    attrs: NodeAttributes | None = None,
    triangles: TriangleSet | None = None,
    bound_config: BoundConfig | None = None,
    start: Partition | None = None,
) -> BoundState:
    """Assemble the solver's starting bracket.

    Upper bound: local-search improvement of the start partition (party
    warm start when attributes are given, otherwise all nodes in one
    group). Lower bound: the better of the LP relaxation and the triangle
    packing.
    """
    if triangles is None:
        triangles = enumerate_triangles(g)
    if start is None:
        start = (
            warm_start_partition(g, attrs)
            if attrs is not None
            else Partition((0,) * g.node_count)
        )
    incumbent = local_search_improve(g, start)
    upper = frustration_count(g, incumbent)
    packing = triangle_packing_bound(g, triangles)
    if packing >= upper:
        # the cheap combinatorial bound already meets the incumbent, so the
        # (potentially expensive) LP cannot add anything
        return BoundState(
            lower=float(min(packing, upper)),
            upper=upper,
            incumbent=incumbent,
            lower_method=TRIANGLE_PACKING,
        )
    lower, method = lp_lower_bound(g, triangles, bound_config)
    if packing > lower:
        lower, method = float(packing), TRIANGLE_PACKING
    lower = min(lower, float(upper))
    return BoundState(lower=lower, upper=upper, incumbent=incumbent, lower_method=method)


def brute_force_oracle(g: SignedGraph) -> tuple[int, Partition]:
    """Exhaustive minimum over all 2^(n-1) partitions with node 0 in group 0.

    Returns the frustration index and the lexicographically smallest
    minimizing assignment. Refuses graphs with more than
    `BRUTE_FORCE_MAX_NODES` nodes.
    """
    n = g.node_count
    if n > BRUTE_FORCE_MAX_NODES:
        raise ValueError(
            f"brute force capped at {BRUTE_FORCE_MAX_NODES} nodes, got {n}"
        )
    masks = np.arange(1 << (n - 1), dtype=np.uint32) << 1  # bit 0 stays 0
    counts = np.zeros(masks.shape, dtype=np.int32)
    for eid in range(g.edge_count):
        i, j, s = int(g.edge_u[eid]), int(g.edge_v[eid]), int(g.edge_sign[eid])
        xor = ((masks >> i) ^ (masks >> j)) & 1
        counts += xor if s == 1 else (1 - xor)
    best = int(counts.min())
    winners = masks[counts == best]
    # lexicographic order on (x_0, ..., x_{n-1}) = numeric order on reversed bits
    revkey = np.zeros(winners.shape, dtype=np.uint64)
    for bit in range(n):
        revkey |= (((winners >> bit) & 1).astype(np.uint64)) << (n - 1 - bit)
    pick = int(winners[np.argmin(revkey)])
    bits = tuple((pick >> k) & 1 for k in range(n))
    return best, Partition(bits)


class _Budget:
    def __init__(self, config: SolveConfig):
        self.node_budget = config.node_budget
        self.deadline = time.perf_counter() + config.time_budget
        self.nodes = 0
        self.exceeded_reason: str | None = None

    def charge(self) -> bool:
        self.nodes += 1
        if self.nodes > self.node_budget:
            self.exceeded_reason = "node budget exceeded"
            return False
        if self.nodes % 1024 == 0 and time.perf_counter() > self.deadline:
            self.exceeded_reason = "time budget exceeded"
            return False
        return True


def solve_exact(
    g: SignedGraph,
    bounds: BoundState | None = None,
    config: SolveConfig | None = None,
) -> SolveResult:
    """Exact frustration index via depth-first branch-and-bound.

    Realizes the 0/1 model with per-edge frustration indicators driven by
    the node variables: branching fixes node group bits, with the first
    node of every connected component pinned to group 0 (complement
    symmetry). A search node is pruned when its committed frustration plus
    a residual bound (cost of attaching each frontier node to its cheaper
    side, plus surviving edge-disjoint negative triangles among untouched
    nodes) cannot beat the incumbent; the global LP bound additionally
    terminates the search as soon as the incumbent meets it. Exceeding the
    node or time budget returns the incumbent flagged as not certified.
    """
    t0 = time.perf_counter()
    config = config or SolveConfig()

    balanced, witness = is_balanced(g)
    if balanced:
        method = bounds.lower_method if bounds is not None else LP_ROOT
        proof = BoundState(0.0, 0, witness, method)
        return SolveResult(0, witness, proof, 0, time.perf_counter() - t0, True)
    if bounds is None:
        bounds = compute_bounds(g)
    if frustration_count(g, bounds.incumbent) != bounds.upper:
        raise ValueError("bound state incumbent does not match its upper bound")

    n = g.node_count
    adj = [list(d.items()) for d in g.neighbor_signs]
    ceil_lower = bounds.lower_int

    incumbent_bits = list(bounds.incumbent.bits)
    incumbent_val = bounds.upper

    pack = _pack_negative_triangles(g, enumerate_triangles(g))
    node_packs: list[list[int]] = [[] for _ in range(n)]
    for pid, (i, j, k) in enumerate(pack):
        node_packs[i].append(pid)
        node_packs[j].append(pid)
        node_packs[k].append(pid)
    pack_hits = [0] * len(pack)

    x = [-1] * n
    c0 = [0] * n
    c1 = [0] * n
    committed = 0
    bsum = 0
    survivors = len(pack)
    best_bits_found = incumbent_bits
    best_val = incumbent_val
    stop = False
    budget = _Budget(config)

    def assign(u: int, b: int) -> None:
        nonlocal committed, bsum, survivors
        x[u] = b
        committed += c0[u] if b == 0 else c1[u]
        bsum -= c0[u] if c0[u] < c1[u] else c1[u]
        for v, s in adj[u]:
            if x[v] == -1:
                old = c0[v] if c0[v] < c1[v] else c1[v]
                if (s == 1) != (b == 1):  # edge frustrated if v joins group 1
                    c1[v] += 1
                else:
                    c0[v] += 1
                new = c0[v] if c0[v] < c1[v] else c1[v]
                bsum += new - old
        for pid in node_packs[u]:
            if pack_hits[pid] == 0:
                survivors -= 1
            pack_hits[pid] += 1

    def unassign(u: int, b: int) -> None:
        nonlocal committed, bsum, survivors
        for pid in node_packs[u]:
            pack_hits[pid] -= 1
            if pack_hits[pid] == 0:
                survivors += 1
        for v, s in adj[u]:
            if x[v] == -1:
                old = c0[v] if c0[v] < c1[v] else c1[v]
                if (s == 1) != (b == 1):
                    c1[v] -= 1
                else:
                    c0[v] -= 1
                new = c0[v] if c0[v] < c1[v] else c1[v]
                bsum += new - old
        committed -= c0[u] if b == 0 else c1[u]
        bsum += c0[u] if c0[u] < c1[u] else c1[u]
        x[u] = -1

    # pin one node per component (isolated nodes land in group 0 outright)
    roots = []
    seen = [False] * n
    for r in range(n):
        if seen[r]:
            continue
        roots.append(r)
        stack = [r]
        seen[r] = True
        while stack:
            u = stack.pop()
            for v, _ in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
    for r in roots:
        assign(r, 0)
    unassigned = n - len(roots)

    def dfs(remaining: int) -> None:
        nonlocal best_bits_found, best_val, stop
        if stop:
            return
        if not budget.charge():
            stop = True
            return
        if config.log_interval and budget.nodes % config.log_interval == 0:
            logger.info(
                "bound lower=%s upper=%s nodes=%s", ceil_lower, best_val, budget.nodes
            )
        if committed + bsum + survivors >= best_val:
            return
        if remaining == 0:
            best_val = committed
            best_bits_found = x.copy()
            if best_val <= ceil_lower:
                stop = True
            return
        # fail-first: largest commitment imbalance, ties by index
        pick, pick_gap = -1, -1
        for u in range(n):
            if x[u] == -1:
                gap = c0[u] - c1[u]
                if gap < 0:
                    gap = -gap
                if gap > pick_gap:
                    pick, pick_gap = u, gap
        first = 0 if c0[pick] <= c1[pick] else 1
        for b in (first, 1 - first):
            assign(pick, b)
            dfs(remaining - 1)
            unassign(pick, b)
            if stop:
                return

    if incumbent_val > ceil_lower:
        old_limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old_limit, n + 500))
        try:
            dfs(unassigned)
        finally:
            sys.setrecursionlimit(old_limit)

    wall = time.perf_counter() - t0
    best_bits = best_bits_found
    if best_bits[0] == 1:
        best_bits = [1 - b for b in best_bits]
    best_partition = Partition(tuple(best_bits))

    if budget.exceeded_reason is not None:
        proof = BoundState(
            bounds.lower, best_val, best_partition, bounds.lower_method
        )
        return SolveResult(
            frustration_index=best_val,
            optimal_partition=best_partition,
            proof=proof,
            node_count_explored=budget.nodes,
            wall_time=wall,
            certified=False,
            status=f"not certified optimal: {budget.exceeded_reason}",
        )

    proof = BoundState(float(best_val), best_val, best_partition, bounds.lower_method)
    return SolveResult(
        frustration_index=best_val,
        optimal_partition=best_partition,
        proof=proof,
        node_count_explored=budget.nodes,
        wall_time=wall,
        certified=True,
    )
