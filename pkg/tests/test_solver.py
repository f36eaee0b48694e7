import math

import numpy as np
import pytest

from balancekit import (
    BoundConfig,
    BoundState,
    Partition,
    SolveConfig,
    brute_force_oracle,
    compute_bounds,
    from_edge_list,
    frustration_count,
    local_search_improve,
    lp_lower_bound,
    solve_exact,
    switch,
    triangle_packing_bound,
    warm_start_partition,
)
from balancekit.graph import NodeAttributes
from balancekit.solver import LP_FULL, LP_ROOT, TRIANGLE_PACKING, SolveResult

from conftest import planted_partition_graph, random_signed_graph, toy5_partition

# LP optimum of the toy fixture's relaxation, frozen from two independent
# LP codes run ahead of the build (both returned 1.0 exactly)
TOY5_LP_VALUE = 1.0


def attrs_for(g, parties):
    return NodeAttributes(party=dict(zip(g.nodes, parties)))


class TestWarmStart:
    def test_mapping(self):
        g = from_edge_list([("a", "b", 1), ("b", "c", 1)])
        attrs = attrs_for(g, ["D", "R", "I"])
        assert warm_start_partition(g, attrs).bits == (0, 1, 1)

    def test_all_democrats(self):
        g = from_edge_list([("a", "b", 1)])
        assert warm_start_partition(g, attrs_for(g, ["D", "D"])).bits == (0, 0)

    def test_all_republicans(self):
        g = from_edge_list([("a", "b", 1)])
        p = warm_start_partition(g, attrs_for(g, ["R", "R"]))
        assert p.bits == (1, 1)
        assert frustration_count(g, p) == frustration_count(g, p.complement())

    def test_missing_attribute(self):
        g = from_edge_list([("a", "b", 1)])
        with pytest.raises(ValueError, match="missing"):
            warm_start_partition(g, NodeAttributes(party={"a": "D"}))


class TestLocalSearch:
    def test_optimal_start_unchanged(self, toy5):
        p = toy5_partition(toy5)
        assert local_search_improve(toy5, p).bits == p.bits

    def test_toy5_from_all_zeros(self, toy5):
        start = Partition((0,) * 5)
        assert frustration_count(toy5, start) == 3
        improved = local_search_improve(toy5, start)
        assert frustration_count(toy5, improved) == 1

    def test_all_positive_near_monochrome(self):
        g = from_edge_list([("a", "b", 1), ("b", "c", 1)])
        improved = local_search_improve(g, Partition((0, 1, 0)))
        assert frustration_count(g, improved) == 0

    @pytest.mark.parametrize("seed", range(8))
    def test_one_move_optimal_and_no_worse(self, seed):
        g = random_signed_graph(n=12, edge_prob=0.5, neg_prob=0.4, seed=seed)
        rng = np.random.default_rng(seed)
        start = Partition(tuple(int(b) for b in rng.integers(0, 2, 12)))
        improved = local_search_improve(g, start)
        base = frustration_count(g, improved)
        assert base <= frustration_count(g, start)
        for i in range(g.node_count):
            bits = list(improved.bits)
            bits[i] = 1 - bits[i]
            assert frustration_count(g, Partition(tuple(bits))) >= base


class TestTrianglePacking:
    def test_toy5(self, toy5):
        assert triangle_packing_bound(toy5) == 1

    def test_balanced_graph(self):
        g = from_edge_list([("a", "b", 1), ("b", "c", -1), ("a", "c", -1)])
        assert triangle_packing_bound(g) == 0

    def test_two_disjoint_negative_triangles(self):
        edges = [
            ("a", "b", -1), ("b", "c", 1), ("a", "c", 1),
            ("d", "e", -1), ("e", "f", 1), ("d", "f", 1),
        ]
        assert triangle_packing_bound(from_edge_list(edges)) == 2


class TestLpLowerBound:
    def test_toy5_frozen_value(self, toy5):
        value, method = lp_lower_bound(toy5)
        assert method == LP_FULL
        assert 0.0 < value <= TOY5_LP_VALUE
        assert value == pytest.approx(TOY5_LP_VALUE, abs=1e-5)
        assert math.ceil(value) == 1

    def test_all_positive_graph_is_zero(self):
        edges = [(f"v{i}", f"v{j}", 1) for i in range(5) for j in range(i + 1, 5)]
        value, _ = lp_lower_bound(from_edge_list(edges))
        assert value == 0.0

    def test_tier0_is_weak_but_valid(self, toy5):
        value, method = lp_lower_bound(toy5, config=BoundConfig(tier=0))
        assert method == LP_ROOT
        assert value == 0.0

    def test_tier2_matches_tier1_on_toy5(self, toy5):
        v1, _ = lp_lower_bound(toy5, config=BoundConfig(tier=1))
        v2, _ = lp_lower_bound(toy5, config=BoundConfig(tier=2))
        assert v1 == pytest.approx(v2, abs=1e-6)

    def test_auto_tier_downgrades_on_large_graphs(self, toy5):
        cfg = BoundConfig(tier="auto", auto_tier_node_limit=3)
        value, method = lp_lower_bound(toy5, config=cfg)
        assert method == LP_ROOT and value == 0.0

    @pytest.mark.parametrize("seed", range(10))
    def test_bound_below_optimum(self, seed):
        g = random_signed_graph(n=10, edge_prob=0.5, neg_prob=0.5, seed=seed + 200)
        best, _ = brute_force_oracle(g)
        value, _ = lp_lower_bound(g)
        assert value <= best + 1e-9


class TestBoundState:
    def test_rejects_crossed_bounds(self, toy5):
        with pytest.raises(ValueError, match="lower"):
            BoundState(lower=3.0, upper=1, incumbent=toy5_partition(toy5))

    def test_lower_int(self, toy5):
        bs = BoundState(lower=0.9999990, upper=1, incumbent=toy5_partition(toy5))
        assert bs.lower_int == 1

    def test_compute_bounds_sandwich(self, toy5):
        bounds = compute_bounds(toy5)
        assert bounds.lower <= 1 <= bounds.upper
        assert bounds.upper == frustration_count(toy5, bounds.incumbent)
        assert bounds.lower_method in (LP_FULL, LP_ROOT, TRIANGLE_PACKING)


class TestSolveExact:
    def test_toy5(self, toy5):
        result = solve_exact(toy5)
        assert result.frustration_index == 1
        assert result.certified
        g0, g1 = result.optimal_partition.groups(toy5)
        assert {g0, g1} == {frozenset({"1", "2", "3"}), frozenset({"4", "5"})}
        assert result.proof.lower == result.proof.upper == 1

    def test_balanced_graph_uses_witness(self):
        g = from_edge_list([("a", "b", 1), ("b", "c", -1), ("a", "c", -1)])
        result = solve_exact(g)
        assert result.frustration_index == 0
        assert result.certified
        assert frustration_count(g, result.optimal_partition) == 0
        assert result.node_count_explored == 0

    def test_budget_exhaustion_flags_result(self):
        # all-negative 5-cycle: unbalanced, triangle-free, so the root gap
        # stays open and the search must actually run
        edges = [(f"c{i}", f"c{(i + 1) % 5}", -1) for i in range(5)]
        g = from_edge_list(edges)
        result = solve_exact(g, config=SolveConfig(node_budget=1))
        assert not result.certified
        assert "not certified" in result.status
        assert result.proof.lower < result.proof.upper
        assert frustration_count(g, result.optimal_partition) == result.frustration_index

    def test_negative_cycle_solved_without_budget(self):
        edges = [(f"c{i}", f"c{(i + 1) % 5}", -1) for i in range(5)]
        result = solve_exact(from_edge_list(edges))
        assert result.certified and result.frustration_index == 1

    def test_progress_log_lines(self, caplog):
        edges = [(f"c{i}", f"c{(i + 1) % 7}", -1) for i in range(7)]
        g = from_edge_list(edges)
        with caplog.at_level("INFO", logger="balancekit.solver"):
            solve_exact(g, config=SolveConfig(log_interval=1))
        assert any("bound lower=" in rec.getMessage() for rec in caplog.records)

    def test_uncertified_result_requires_status(self, toy5):
        with pytest.raises(ValueError, match="status"):
            SolveResult(
                frustration_index=1,
                optimal_partition=toy5_partition(toy5),
                proof=BoundState(0.0, 1, toy5_partition(toy5)),
                node_count_explored=0,
                wall_time=0.0,
                certified=False,
                status="optimal",
            )

    def test_warm_start_complement_invariance(self, toy5):
        attrs = attrs_for(toy5, ["D", "D", "D", "R", "R"])
        start = warm_start_partition(toy5, attrs)
        for s in (start, start.complement()):
            bounds = compute_bounds(toy5, start=s)
            assert solve_exact(toy5, bounds).frustration_index == 1

    def test_deterministic_across_runs(self):
        g = random_signed_graph(n=14, edge_prob=0.4, neg_prob=0.5, seed=77)
        r1 = solve_exact(g)
        r2 = solve_exact(g)
        assert r1.frustration_index == r2.frustration_index
        assert r1.optimal_partition.bits == r2.optimal_partition.bits
        assert r1.node_count_explored == r2.node_count_explored

    @pytest.mark.parametrize("seed", range(30))
    def test_matches_oracle_small(self, seed):
        g = random_signed_graph(
            n=4 + seed % 9,
            edge_prob=(0.3, 0.6)[seed % 2],
            neg_prob=(0.3, 0.5, 0.7)[seed % 3],
            seed=seed + 1000,
        )
        best, best_partition = brute_force_oracle(g)
        result = solve_exact(g)
        assert result.certified
        assert result.frustration_index == best
        assert frustration_count(g, result.optimal_partition) == best
        assert frustration_count(g, best_partition) == best

    @pytest.mark.parametrize("seed", range(10))
    def test_value_bounds_invariants(self, seed):
        g = random_signed_graph(n=11, edge_prob=0.5, neg_prob=0.5, seed=seed + 60)
        result = solve_exact(g)
        assert result.frustration_index <= min(
            g.negative_edge_count, g.edge_count // 2
        )

    def test_positive_edge_count_is_not_an_upper_bound(self):
        # documents why m+ is excluded from the value-bound invariant: the
        # all-negative triangle has no positive edges yet frustration 1
        g = from_edge_list([("a", "b", -1), ("b", "c", -1), ("a", "c", -1)])
        result = solve_exact(g)
        assert result.frustration_index == 1 > g.positive_edge_count

    @pytest.mark.parametrize("seed", range(6))
    def test_switching_invariance(self, seed):
        g = random_signed_graph(n=12, edge_prob=0.4, neg_prob=0.5, seed=seed + 90)
        rng = np.random.default_rng(seed)
        cut = Partition(tuple(int(b) for b in rng.integers(0, 2, g.node_count)))
        assert (
            solve_exact(switch(g, cut)).frustration_index
            == solve_exact(g).frustration_index
        )

    @pytest.mark.parametrize("seed", range(4))
    def test_edge_deletion_monotonicity(self, seed):
        g = random_signed_graph(n=9, edge_prob=0.5, neg_prob=0.5, seed=seed + 40)
        base, _ = brute_force_oracle(g)
        edges = g.edge_list()
        for drop in range(len(edges)):
            remaining = [e for k, e in enumerate(edges) if k != drop]
            sub = from_edge_list(remaining, nodes=g.nodes)
            val, _ = brute_force_oracle(sub)
            assert base - 1 <= val <= base

    def test_planted_hundred_node_instance(self):
        g = planted_partition_graph(n=100, edge_prob=0.12, flips=4, seed=5)
        result = solve_exact(g, config=SolveConfig(node_budget=500_000, time_budget=120))
        assert result.certified
        assert result.frustration_index <= 4


class TestBruteForce:
    def test_toy5(self, toy5):
        best, p = brute_force_oracle(toy5)
        assert best == 1
        assert p.bits == (0, 0, 0, 1, 1)

    def test_k3_all_negative_lexicographic(self):
        g = from_edge_list([("a", "b", -1), ("b", "c", -1), ("a", "c", -1)])
        best, p = brute_force_oracle(g)
        assert best == 1
        assert p.bits == (0, 0, 1)

    def test_single_positive_edge(self):
        best, p = brute_force_oracle(from_edge_list([("a", "b", 1)]))
        assert best == 0 and p.bits == (0, 0)

    def test_refuses_large_graphs(self):
        g = from_edge_list([], nodes=[f"v{i}" for i in range(21)])
        with pytest.raises(ValueError, match="capped"):
            brute_force_oracle(g)
