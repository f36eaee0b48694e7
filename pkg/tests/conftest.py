import numpy as np
import pytest

from balancekit import Partition, SignedGraph, from_edge_list

# Five-node toy network: four positive and three negative edges, frustration
# index 1 with the unique optimal split {1,2,3} vs {4,5}.
TOY5_EDGES = [
    ("1", "3", 1),
    ("2", "3", 1),
    ("2", "5", -1),
    ("1", "4", -1),
    ("3", "4", -1),
    ("4", "5", 1),
    ("1", "5", 1),
]


@pytest.fixture
def toy5() -> SignedGraph:
    return from_edge_list(TOY5_EDGES)


def toy5_partition(g: SignedGraph, group1=("4", "5")) -> Partition:
    return Partition.from_group(g, group1)


def random_signed_graph(
    n: int, edge_prob: float, neg_prob: float, seed: int
) -> SignedGraph:
    """Erdos-Renyi-style signed graph; guaranteed at least one edge."""
    rng = np.random.default_rng(seed)
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < edge_prob:
                sign = -1 if rng.random() < neg_prob else 1
                edges.append((f"n{i}", f"n{j}", sign))
    if not edges:
        edges.append(("n0", "n1", 1))
    return from_edge_list(edges, nodes=[f"n{i}" for i in range(n)])


def planted_partition_graph(
    n: int, edge_prob: float, flips: int, seed: int
) -> SignedGraph:
    """Balanced two-group graph with `flips` endpoint-disjoint sign flips.

    Starts perfectly balanced (positive within groups, negative across), so
    after flipping the frustration index is at most `flips`.
    """
    rng = np.random.default_rng(seed)
    group = rng.integers(0, 2, size=n)
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < edge_prob:
                s = 1 if group[i] == group[j] else -1
                edges.append([f"v{i}", f"v{j}", s])
    used: set[str] = set()
    done = 0
    for idx in rng.permutation(len(edges)):
        u, v, s = edges[idx]
        if u in used or v in used:
            continue
        edges[idx][2] = -s
        used.update((u, v))
        done += 1
        if done == flips:
            break
    return from_edge_list([tuple(e) for e in edges])
