import itertools
import math

import numpy as np
import pytest

from balancekit import (
    BipartiteGraph,
    NullModel,
    extract_signed_backbone,
    fit_cell_probabilities,
    sample_null_projection,
)
from balancekit.backbone import FitError, all_row_pairs

# 4x6 incidence with two distinct row sums (4, 2) and two distinct column
# sums (3, 1); the logistic-on-marginals MLE then reproduces the marginals
# exactly. Probabilities frozen from an independent ML fit done ahead of
# the build (they come out as twelfths).
FIT_FIXTURE = np.array(
    [
        [1, 1, 1, 1, 0, 0],
        [1, 1, 1, 0, 1, 0],
        [1, 0, 1, 0, 0, 0],
        [0, 1, 0, 0, 0, 1],
    ],
    dtype=np.int8,
)
FIT_FIXTURE_P = np.array(
    [
        [11, 11, 11, 5, 5, 5],
        [11, 11, 11, 5, 5, 5],
        [7, 7, 7, 1, 1, 1],
        [7, 7, 7, 1, 1, 1],
    ]
) / 12.0


def direct_null(P, observed=None, seed=0):
    """NullModel wrapper around hand-set cell probabilities."""
    P = np.asarray(P, dtype=float)
    if observed is None:
        rng = np.random.default_rng(seed)
        observed = (rng.random(P.shape) < P).astype(np.int8)
    bg = BipartiteGraph(incidence=np.asarray(observed, dtype=np.int8))
    return NullModel(
        source=bg, cell_probabilities=P, coefficients=(0.0, 0.0, 0.0),
        deviance=0.0, iterations=0,
    )


class TestBipartiteGraph:
    def test_marginals(self):
        b = BipartiteGraph(incidence=FIT_FIXTURE)
        assert b.row_marginals.tolist() == [4, 4, 2, 2]
        assert b.col_marginals.tolist() == [3, 3, 3, 1, 1, 1]
        assert b.row_count == 4 and b.col_count == 6

    def test_joint_count(self):
        b = BipartiteGraph(incidence=FIT_FIXTURE)
        assert b.joint_count(0, 1) == 3
        assert b.joint_count(2, 3) == 0

    def test_rejects_empty_and_nonbinary(self):
        with pytest.raises(ValueError):
            BipartiteGraph(incidence=np.zeros((0, 3)))
        with pytest.raises(ValueError):
            BipartiteGraph(incidence=np.array([[0, 2]]))

    def test_default_labels(self):
        b = BipartiteGraph(incidence=FIT_FIXTURE)
        assert b.row_labels == ("L0", "L1", "L2", "L3")


class TestFit:
    def test_frozen_fixture_probabilities(self):
        nm = fit_cell_probabilities(BipartiteGraph(incidence=FIT_FIXTURE))
        assert np.abs(nm.cell_probabilities - FIT_FIXTURE_P).max() < 1e-6

    def test_marginals_reproduced(self):
        nm = fit_cell_probabilities(BipartiteGraph(incidence=FIT_FIXTURE))
        assert nm.marginal_deviation() < 1e-3
        assert np.allclose(nm.expected_row_marginals, [4, 4, 2, 2], atol=1e-6)
        assert np.allclose(nm.expected_col_marginals, [3, 3, 3, 1, 1, 1], atol=1e-6)

    def test_identity_2x2_symmetric(self):
        nm = fit_cell_probabilities(BipartiteGraph(incidence=np.eye(2, dtype=np.int8)))
        p = nm.cell_probabilities
        # equal marginals force one shared probability
        assert np.abs(p - p[0, 0]).max() < 1e-9

    def test_constant_matrix_rejected(self):
        with pytest.raises(FitError, match="degenerate"):
            fit_cell_probabilities(BipartiteGraph(incidence=np.ones((3, 4), dtype=np.int8)))
        with pytest.raises(FitError, match="degenerate"):
            fit_cell_probabilities(BipartiteGraph(incidence=np.zeros((3, 4), dtype=np.int8)))

    def test_saturated_row_clamps_with_warning(self):
        inc = np.array([[1, 1, 1], [1, 0, 0], [0, 1, 0]], dtype=np.int8)
        with pytest.warns(UserWarning):
            nm = fit_cell_probabilities(BipartiteGraph(incidence=inc))
        p = nm.cell_probabilities
        assert (p >= 1e-6).all() and (p <= 1 - 1e-6).all()


class TestSampling:
    def test_all_zero_probabilities(self):
        nm = direct_null(np.zeros((3, 4)), observed=FIT_FIXTURE[:3, :4])
        dists = sample_null_projection(nm, replicates=50, seed=1, inference=False)
        assert all((d.samples == 0).all() for d in dists.values())

    def test_all_one_probabilities(self):
        nm = direct_null(np.ones((3, 4)) - 1e-6, observed=FIT_FIXTURE[:3, :4])
        dists = sample_null_projection(nm, replicates=50, seed=1, inference=False)
        assert all((d.samples == 4).all() for d in dists.values())

    def test_inference_mode_refuses_tiny_runs(self):
        nm = direct_null(np.full((3, 4), 0.5))
        with pytest.raises(ValueError, match="inference"):
            sample_null_projection(nm, replicates=50, seed=1, inference=True)
        # identical run allowed for tests
        sample_null_projection(nm, replicates=50, seed=1, inference=False)

    def test_inference_mode_warns_below_recommended(self):
        nm = direct_null(np.full((2, 3), 0.5))
        with pytest.warns(UserWarning, match="recommended"):
            sample_null_projection(nm, replicates=200, seed=1, inference=True)

    def test_rejects_self_pairs(self):
        nm = direct_null(np.full((3, 4), 0.5))
        with pytest.raises(ValueError, match="distinct"):
            sample_null_projection(nm, pairs=[(1, 1)], replicates=10, inference=False)

    def test_seed_reproducibility(self):
        nm = direct_null(np.full((4, 6), 0.4))
        a = sample_null_projection(nm, replicates=64, seed=9, inference=False)
        b = sample_null_projection(nm, replicates=64, seed=9, inference=False)
        c = sample_null_projection(nm, replicates=64, seed=10, inference=False)
        for key in a:
            assert np.array_equal(a[key].samples, b[key].samples)
        assert any(not np.array_equal(a[k].samples, c[k].samples) for k in a)

    @pytest.mark.parametrize("workers", [2, 8])
    def test_worker_count_invariance(self, workers):
        nm = direct_null(np.full((5, 7), 0.35))
        base = sample_null_projection(nm, replicates=96, seed=3, workers=1, inference=False)
        alt = sample_null_projection(nm, replicates=96, seed=3, workers=workers, inference=False)
        for key in base:
            assert np.array_equal(base[key].samples, alt[key].samples)

    def test_matches_exhaustive_enumeration(self):
        # 3x4 cells: enumerate all 4096 matrices, weight by prod of cell
        # probabilities, and tabulate the joint count of rows 0 and 1
        P = np.array([[0.8, 0.3, 0.5, 0.6], [0.2, 0.7, 0.4, 0.5], [0.5, 0.5, 0.5, 0.5]])
        exact = np.zeros(5)
        for bits in itertools.product((0, 1), repeat=12):
            m = np.array(bits).reshape(3, 4)
            weight = np.prod(np.where(m == 1, P, 1 - P))
            exact[int((m[0] * m[1]).sum())] += weight
        nm = direct_null(P)
        dists = sample_null_projection(
            nm, pairs=[(0, 1)], replicates=50_000, seed=99, inference=False
        )
        empirical = np.bincount(dists[(0, 1)].samples, minlength=5) / 50_000
        tv = 0.5 * np.abs(empirical - exact).sum()
        assert tv < 0.02


class TestBackboneExtraction:
    def test_observed_below_all_samples_is_negative(self):
        samples = np.arange(10, 110, dtype=np.int32)
        from balancekit import ProjectionDistribution

        d = ProjectionDistribution(pair=(0, 1), observed=5, samples=samples)
        b = BipartiteGraph(incidence=np.array([[1, 0], [0, 1]], dtype=np.int8))
        g = extract_signed_backbone(b, {(0, 1): d}, alpha=0.05)
        assert g.edge_list() == [("L0", "L1", -1)]

    def test_observed_at_median_yields_no_edge(self):
        from balancekit import ProjectionDistribution

        samples = np.array([0, 1, 1, 2, 2, 2, 3, 3, 4, 5], dtype=np.int32)
        d = ProjectionDistribution(pair=(0, 1), observed=2, samples=samples)
        b = BipartiteGraph(incidence=np.array([[1, 0], [0, 1]], dtype=np.int8))
        g = extract_signed_backbone(b, {(0, 1): d}, alpha=0.05)
        assert g.edge_count == 0

    def test_alpha_near_one_signs_almost_everything(self):
        P = np.clip(np.random.default_rng(4).random((6, 40)), 0.1, 0.9)
        nm = direct_null(P, seed=11)
        dists = sample_null_projection(nm, replicates=400, seed=2, inference=False)
        g = extract_signed_backbone(nm.source, dists, alpha=0.999)
        assert g.edge_count >= 0.8 * len(dists)

    def test_missing_pair_is_an_error(self):
        b = BipartiteGraph(incidence=np.array([[1, 0], [0, 1], [1, 1]], dtype=np.int8))
        with pytest.raises(ValueError, match="missing projection"):
            extract_signed_backbone(b, {}, alpha=0.05)

    def test_alpha_bounds(self):
        b = BipartiteGraph(incidence=np.array([[1, 0], [0, 1]], dtype=np.int8))
        with pytest.raises(ValueError, match="alpha"):
            extract_signed_backbone(b, {}, alpha=0.0)

    def test_alpha_monotonicity_and_symmetry(self):
        P = np.clip(np.random.default_rng(8).beta(2, 3, (8, 60)), 0.05, 0.95)
        nm = direct_null(P, seed=21)
        dists = sample_null_projection(nm, replicates=500, seed=13, inference=False)
        previous: set = set()
        for alpha in (0.01, 0.05, 0.10):
            g = extract_signed_backbone(nm.source, dists, alpha=alpha)
            edges = {(u, v) for u, v, _ in g.edge_list()}
            assert previous <= edges
            previous = edges
            assert all(u != v for u, v in edges)

    def test_null_calibration(self):
        # observed data drawn from the null itself: the signed fraction
        # should land near alpha
        rng = np.random.default_rng(77)
        P = np.clip(rng.beta(2, 4, size=(30, 300)) * 0.8 + 0.05, 0.02, 0.9)
        nm = direct_null(P, seed=77)
        dists = sample_null_projection(nm, replicates=2000, seed=5, inference=True)
        alpha = 0.05
        g = extract_signed_backbone(nm.source, dists, alpha=alpha)
        fraction = g.edge_count / len(dists)
        se = math.sqrt(alpha * (1 - alpha) / len(dists))
        assert abs(fraction - alpha) <= 2 * se

    def test_fitted_pipeline_end_to_end(self):
        bg = BipartiteGraph(incidence=FIT_FIXTURE)
        nm = fit_cell_probabilities(bg)
        dists = sample_null_projection(nm, replicates=300, seed=0, inference=False)
        assert set(dists) == set(all_row_pairs(bg))
        g = extract_signed_backbone(bg, dists, alpha=0.05)
        assert g.node_count == 4
        assert set(g.nodes) == set(bg.row_labels)
