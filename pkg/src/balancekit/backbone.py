"""Signed-network inference from bipartite incidence via the stochastic
degree sequence model: a null model conditioned on row and column
marginals, Monte Carlo joint-count distributions, and two-tailed
significance thresholding."""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graph import SignedGraph, from_edge_list

PROB_CLAMP = 1e-6
MARGINAL_FIT_TOL = 1e-3
MIN_INFERENCE_REPLICATES = 100
RECOMMENDED_REPLICATES = 1000


class FitError(RuntimeError):
    """Null-model fit failed; carries the last deviance seen."""

    def __init__(self, message: str, deviance: float | None = None):
        super().__init__(message)
        self.deviance = deviance


@dataclass(frozen=True)
class BipartiteGraph:
    """Binary legislator-by-bill incidence with cached marginals."""

    incidence: np.ndarray
    row_labels: tuple[str, ...] = ()
    col_labels: tuple[str, ...] = ()

    def __post_init__(self):
        b = np.asarray(self.incidence, dtype=np.int8)
        if b.ndim != 2 or b.size == 0:
            raise ValueError("incidence must be a nonempty 2-d matrix")
        if not np.isin(b, (0, 1)).all():
            raise ValueError("incidence entries must be 0 or 1")
        object.__setattr__(self, "incidence", b)
        if not self.row_labels:
            object.__setattr__(
                self, "row_labels", tuple(f"L{i}" for i in range(b.shape[0]))
            )
        if not self.col_labels:
            object.__setattr__(
                self, "col_labels", tuple(f"B{j}" for j in range(b.shape[1]))
            )
        if len(self.row_labels) != b.shape[0] or len(self.col_labels) != b.shape[1]:
            raise ValueError("label count does not match incidence shape")
        b.setflags(write=False)

    @property
    def row_count(self) -> int:
        return self.incidence.shape[0]

    @property
    def col_count(self) -> int:
        return self.incidence.shape[1]

    @property
    def row_marginals(self) -> np.ndarray:
        return self.incidence.sum(axis=1)

    @property
    def col_marginals(self) -> np.ndarray:
        return self.incidence.sum(axis=0)

    def joint_count(self, u: int, v: int) -> int:
        """Observed number of columns shared by rows u and v."""
        return int((self.incidence[u] & self.incidence[v]).sum())


@dataclass(frozen=True)
class NullModel:
    """Fitted cell probabilities plus marginal-fit diagnostics."""

    source: BipartiteGraph
    cell_probabilities: np.ndarray
    coefficients: tuple[float, float, float]
    deviance: float
    iterations: int
    expected_row_marginals: np.ndarray = field(init=False)
    expected_col_marginals: np.ndarray = field(init=False)

    def __post_init__(self):
        p = np.asarray(self.cell_probabilities, dtype=float)
        p.setflags(write=False)
        object.__setattr__(self, "cell_probabilities", p)
        object.__setattr__(self, "expected_row_marginals", p.sum(axis=1))
        object.__setattr__(self, "expected_col_marginals", p.sum(axis=0))

    def marginal_deviation(self) -> float:
        """Largest relative gap between expected and observed marginals."""
        devs = []
        for expected, observed in (
            (self.expected_row_marginals, self.source.row_marginals),
            (self.expected_col_marginals, self.source.col_marginals),
        ):
            scale = np.maximum(observed.astype(float), 1.0)
            devs.append(np.max(np.abs(expected - observed) / scale))
        return float(max(devs))


@dataclass(frozen=True)
class ProjectionDistribution:
    """Null samples of the joint co-sponsorship count for one row pair."""

    pair: tuple[int, int]
    observed: int
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def sample_count(self) -> int:
        return len(self.samples)

    @property
    def frac_le(self) -> float:
        """Fraction of null samples <= the observed count."""
        return float((self.samples <= self.observed).mean())

    @property
    def frac_ge(self) -> float:
        """Fraction of null samples >= the observed count."""
        return float((self.samples >= self.observed).mean())


def fit_cell_probabilities(
    b: BipartiteGraph, max_iter: int = 200, tol: float = 1e-10
) -> NullModel:
    """Fit Pr(B_ij = 1) = logistic(b0 + b1 r_i + b2 c_j) by maximum likelihood.

    Cells sharing a (row marginal, column marginal) pair are collapsed into
    weighted binomial observations, so the Newton iterations cost is
    independent of the raw matrix size. Fitted probabilities are clamped
    away from 0 and 1 so downstream Bernoulli streams never degenerate.
    """
    inc = b.incidence
    total = int(inc.sum())
    if total == 0 or total == inc.size:
        raise FitError("degenerate incidence: all cells equal")

    r = b.row_marginals.astype(float)
    c = b.col_marginals.astype(float)
    r_vals, r_inv = np.unique(r, return_inverse=True)
    c_vals, c_inv = np.unique(c, return_inverse=True)
    n_groups = len(r_vals) * len(c_vals)
    group = r_inv[:, None] * len(c_vals) + c_inv[None, :]
    trials = np.bincount(group.ravel(), minlength=n_groups).astype(float)
    successes = np.bincount(
        group.ravel(), weights=inc.ravel(), minlength=n_groups
    ).astype(float)
    keep = trials > 0
    x = np.column_stack(
        [
            np.ones(n_groups),
            np.repeat(r_vals, len(c_vals)),
            np.tile(c_vals, len(r_vals)),
        ]
    )[keep]
    trials, successes = trials[keep], successes[keep]

    def group_deviance(p: np.ndarray) -> float:
        with np.errstate(divide="ignore", invalid="ignore"):
            mu = np.clip(trials * p, 1e-12, None)
            term1 = np.where(successes > 0, successes * np.log(successes / mu), 0.0)
            fails = trials - successes
            nu = np.clip(trials - mu, 1e-12, None)
            term2 = np.where(fails > 0, fails * np.log(fails / nu), 0.0)
        return 2.0 * float((term1 + term2).sum())

    beta = np.zeros(3)
    deviance = np.inf
    for iteration in range(1, max_iter + 1):
        eta = np.clip(x @ beta, -30.0, 30.0)
        p = 1.0 / (1.0 + np.exp(-eta))
        new_deviance = group_deviance(p)
        if abs(new_deviance - deviance) < tol:
            deviance = new_deviance
            break
        deviance = new_deviance
        grad = x.T @ (successes - trials * p)
        w = np.clip(trials * p * (1.0 - p), 1e-12, None)
        hess = x.T @ (x * w[:, None])
        # least-squares step handles rank-deficient designs (e.g. constant
        # marginals); clipping keeps separated fits from overshooting
        step = np.linalg.lstsq(hess, grad, rcond=None)[0]
        biggest = np.abs(step).max()
        if biggest > 10.0:
            step *= 10.0 / biggest
        beta = beta + step
    else:
        raise FitError(
            f"null-model fit did not converge in {max_iter} iterations",
            deviance=float(deviance),
        )

    eta = np.clip(beta[0] + beta[1] * r[:, None] + beta[2] * c[None, :], -30.0, 30.0)
    probs = 1.0 / (1.0 + np.exp(-eta))
    if (b.row_marginals == b.col_count).any() or (b.col_marginals == b.row_count).any():
        warnings.warn(
            "saturated row or column marginal; clamping cell probabilities",
            stacklevel=2,
        )
    probs = np.clip(probs, PROB_CLAMP, 1.0 - PROB_CLAMP)

    model = NullModel(
        source=b,
        cell_probabilities=probs,
        coefficients=(float(beta[0]), float(beta[1]), float(beta[2])),
        deviance=float(deviance),
        iterations=iteration,
    )
    if model.marginal_deviation() > MARGINAL_FIT_TOL:
        warnings.warn(
            f"null model reproduces marginals to {model.marginal_deviation():.2e} "
            f"relative (> {MARGINAL_FIT_TOL:g})",
            stacklevel=2,
        )
    return model


def all_row_pairs(b: BipartiteGraph) -> list[tuple[int, int]]:
    n = b.row_count
    return [(u, v) for u in range(n) for v in range(u + 1, n)]


def sample_null_projection(
    nm: NullModel,
    pairs: Sequence[tuple[int, int]] | None = None,
    replicates: int = 10_000,
    seed: int = 0,
    workers: int = 1,
    inference: bool = True,
) -> dict[tuple[int, int], ProjectionDistribution]:
    """Monte Carlo joint-count distributions under the fitted null.

    Replicate t draws every cell as an independent Bernoulli from a stream
    keyed by (seed, t), so the aggregate output is bit-identical for any
    worker count. Inference mode refuses fewer than 100 replicates and
    warns below 1000.
    """
    if pairs is None:
        pairs = all_row_pairs(nm.source)
    pairs = [(min(u, v), max(u, v)) for u, v in pairs]
    if any(u == v for u, v in pairs):
        raise ValueError("projection pairs must join two distinct rows")
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    if inference and replicates < MIN_INFERENCE_REPLICATES:
        raise ValueError(
            f"inference mode requires >= {MIN_INFERENCE_REPLICATES} replicates "
            f"(got {replicates}); pass inference=False for test use"
        )
    if inference and replicates < RECOMMENDED_REPLICATES:
        warnings.warn(
            f"{replicates} replicates is below the recommended "
            f"{RECOMMENDED_REPLICATES} for inference",
            stacklevel=2,
        )

    p = nm.cell_probabilities
    row_ids = sorted({u for u, _ in pairs} | {v for _, v in pairs})
    row_pos = {u: i for i, u in enumerate(row_ids)}
    pair_index = [(row_pos[u], row_pos[v]) for u, v in pairs]
    samples = np.empty((len(pairs), replicates), dtype=np.int32)

    def run_chunk(start: int, stop: int) -> None:
        for t in range(start, stop):
            rng = np.random.default_rng([int(seed), int(t)])
            draw = rng.random(p.shape) < p
            sub = draw[row_ids].astype(np.int32)
            joint = sub @ sub.T
            for k, (a, b_) in enumerate(pair_index):
                samples[k, t] = joint[a, b_]

    workers = max(1, int(workers))
    if workers == 1:
        run_chunk(0, replicates)
    else:
        bounds = np.linspace(0, replicates, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(run_chunk, int(a), int(b_))
                for a, b_ in zip(bounds[:-1], bounds[1:])
                if a < b_
            ]
            for f in futures:
                f.result()

    out = {}
    for k, (u, v) in enumerate(pairs):
        obs = nm.source.joint_count(u, v)
        out[(u, v)] = ProjectionDistribution(
            pair=(u, v), observed=obs, samples=samples[k]
        )
    return out


def extract_signed_backbone(
    b: BipartiteGraph,
    dists: dict[tuple[int, int], ProjectionDistribution],
    alpha: float = 0.05,
) -> SignedGraph:
    """Two-tailed backbone: +1 for significantly many shared columns, -1 for
    significantly few, no edge otherwise.

    Strict exceedance decides the tails: +1 only when the fraction of null
    samples >= observed falls below alpha/2 (and symmetrically for -1), so
    ties with the quantile boundary conservatively yield no edge.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    edges = []
    for u in range(b.row_count):
        for v in range(u + 1, b.row_count):
            d = dists.get((u, v))
            if d is None:
                raise ValueError(
                    f"missing projection distribution for pair "
                    f"({b.row_labels[u]!r}, {b.row_labels[v]!r})"
                )
            if d.frac_ge < alpha / 2.0:
                edges.append((b.row_labels[u], b.row_labels[v], 1))
            elif d.frac_le < alpha / 2.0:
                edges.append((b.row_labels[u], b.row_labels[v], -1))
    return from_edge_list(edges, nodes=b.row_labels)
