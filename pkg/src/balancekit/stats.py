"""Session-level effectiveness statistics: passage rates, party and
coalition control, correlations, standardized regressions, and the
time -> mediator -> passage-rate path models."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.stats as st

from .graph import NodeAttributes, Partition, SignedGraph


@dataclass(frozen=True)
class SessionRecord:
    """One chamber-session row of the legislative effectiveness tables."""

    session: int
    dems: int
    reps: int
    coalition_size: int
    dems_in_cc: int
    reps_in_cc: int
    bills_introduced: int
    signed_into_law: int

    @property
    def passage_rate(self) -> float:
        if self.bills_introduced <= 0:
            raise ValueError("passage rate undefined without introduced bills")
        return self.signed_into_law / self.bills_introduced

    @property
    def party_control(self) -> int:
        return party_control(self.dems, self.reps)

    @property
    def coalition_control(self) -> float:
        major = self.dems_in_cc + self.reps_in_cc
        if major <= 0:
            raise ValueError("coalition control undefined: no major-party members")
        return max(self.dems_in_cc, self.reps_in_cc) / major

    @classmethod
    def from_row(cls, row: dict) -> "SessionRecord":
        return cls(
            session=int(row["session"]),
            dems=int(row["dems"]),
            reps=int(row["reps"]),
            coalition_size=int(row["cc_size"]),
            dems_in_cc=int(row["dems_cc"]),
            reps_in_cc=int(row["reps_cc"]),
            bills_introduced=int(row["bills"]),
            signed_into_law=int(row["laws"]),
        )


@dataclass(frozen=True)
class Coefficient:
    name: str
    beta: float
    se: float
    t: float
    p: float

    def stars(self) -> str:
        return significance_stars(self.p)


def significance_stars(p: float) -> str:
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


@dataclass(frozen=True)
class PathModel:
    """Recursive mediation decomposition on standardized variables.

    `a` is the time -> mediator effect, `b` the mediator -> outcome effect
    controlling for time, `c_direct` the remaining direct effect, and
    indirect = a * b with a delta-method (Sobel) standard error. The total
    effect always equals c_direct + indirect for this saturated system.
    """

    a: Coefficient
    b: Coefficient
    c_direct: Coefficient
    total: Coefficient
    indirect: float
    indirect_se: float
    indirect_p: float
    n: int
    bootstrap_ci: tuple[float, float] | None = None
    bootstrap_p: float | None = None

    @property
    def indirect_stars(self) -> str:
        return significance_stars(self.indirect_p)

    def to_dict(self) -> dict:
        out = {
            "n": self.n,
            "paths": {
                c.name: {"beta": c.beta, "se": c.se, "t": c.t, "p": c.p, "sig": c.stars()}
                for c in (self.a, self.b, self.c_direct, self.total)
            },
            "indirect": {
                "beta": self.indirect,
                "se": self.indirect_se,
                "p": self.indirect_p,
                "sig": self.indirect_stars,
            },
        }
        if self.bootstrap_ci is not None:
            out["indirect"]["bootstrap_ci95"] = list(self.bootstrap_ci)
            out["indirect"]["bootstrap_p"] = self.bootstrap_p
        return out


def party_control(dems: int, reps: int) -> int:
    """Absolute seat difference between the two major parties."""
    if dems < 0 or reps < 0:
        raise ValueError("party counts must be nonnegative")
    return abs(reps - dems)


def coalition_partisanship(
    g: SignedGraph, p: Partition, attrs: NodeAttributes
) -> tuple[int, int, int, float]:
    """Size and partisan makeup of the larger ("controlling") coalition.

    Ties go to the group containing node 0. Independents count toward the
    coalition's size but are excluded from the control fraction, which is
    the dominant party's share of the coalition's major-party members.
    Returns (size, dems, reps, control).
    """
    if len(p) != g.node_count:
        raise ValueError("partition does not cover the graph")
    missing = [v for v in g.nodes if v not in attrs.party]
    if missing:
        raise ValueError(f"missing party attribute for: {missing[:5]}")
    sizes = [p.bits.count(0), p.bits.count(1)]
    if sizes[0] == sizes[1]:
        winner = p.bits[0]
    else:
        winner = 0 if sizes[0] > sizes[1] else 1
    members = [v for v, b in zip(g.nodes, p.bits) if b == winner]
    dems = sum(1 for v in members if attrs.party[v] == "D")
    reps = sum(1 for v in members if attrs.party[v] == "R")
    if dems + reps == 0:
        raise ValueError("coalition control undefined: coalition has no D or R members")
    control = max(dems, reps) / (dems + reps)
    return len(members), dems, reps, control


def _as_series(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite values")
    return arr


def _zscore(x: np.ndarray, name: str) -> np.ndarray:
    sd = x.std(ddof=1)
    if sd == 0:
        raise ValueError(f"{name} has zero variance")
    return (x - x.mean()) / sd


def pearson_r(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Sample Pearson correlation with its two-sided t-test p-value (df = n-2)."""
    xa, ya = _as_series(x, "x"), _as_series(y, "y")
    if len(xa) != len(ya):
        raise ValueError("series lengths differ")
    if len(xa) < 3:
        raise ValueError("need at least 3 observations")
    if xa.std(ddof=1) == 0 or ya.std(ddof=1) == 0:
        raise ValueError("zero variance series")
    r, p = st.pearsonr(xa, ya)
    return float(r), float(p)


def ols_standardized(
    outcome: Sequence[float],
    predictors: Sequence[Sequence[float]],
    names: Sequence[str] | None = None,
) -> list[Coefficient]:
    """OLS on z-scored variables: standardized betas with t-test p-values.

    All series are standardized with the sample (n-1) standard deviation;
    the intercept is fitted but not reported since it is zero by
    construction. Collinear predictors are rejected by name.
    """
    y = _zscore(_as_series(outcome, "outcome"), "outcome")
    if names is None:
        names = [f"x{k}" for k in range(len(predictors))]
    if len(names) != len(predictors):
        raise ValueError("one name per predictor required")
    cols = [
        _zscore(_as_series(series, name), name)
        for series, name in zip(predictors, names)
    ]
    n = len(y)
    k = len(cols)
    if any(len(c) != n for c in cols):
        raise ValueError("series lengths differ")
    if n <= k + 1:
        raise ValueError(f"need more than {k + 1} observations for {k} predictors")
    x = np.column_stack([np.ones(n)] + cols)
    rank = np.linalg.matrix_rank(x)
    if rank < k + 1:
        collinear = []
        for idx in range(k):
            others = np.column_stack(
                [np.ones(n)] + [c for j, c in enumerate(cols) if j != idx]
            )
            resid = cols[idx] - others @ np.linalg.lstsq(others, cols[idx], rcond=None)[0]
            if np.abs(resid).max() < 1e-10:
                collinear.append(names[idx])
        raise ValueError(f"collinear predictors: {collinear or list(names)}")

    beta, _, _, _ = np.linalg.lstsq(x, y, rcond=None)
    resid = y - x @ beta
    df = n - k - 1
    sigma2 = float(resid @ resid) / df
    cov = sigma2 * np.linalg.inv(x.T @ x)
    se = np.sqrt(np.diag(cov))
    out = []
    for idx, name in enumerate(names):
        b = float(beta[idx + 1])
        s = float(se[idx + 1])
        t = b / s
        p = 2.0 * float(st.t.sf(abs(t), df))
        out.append(Coefficient(name=name, beta=b, se=s, t=t, p=p))
    return out


def mediation_model(
    time: Sequence[float],
    mediator: Sequence[float],
    outcome: Sequence[float],
    bootstrap: int | None = None,
    seed: int = 0,
    names: tuple[str, str, str] = ("time", "mediator", "outcome"),
) -> PathModel:
    """Two-equation recursive path model on standardized variables.

    Estimates mediator <- time and outcome <- mediator + time by least
    squares (the point estimates coincide with ML for this saturated
    recursive system). The indirect effect a*b carries a Sobel
    delta-method standard error tested against the normal distribution;
    an optional seeded percentile bootstrap refines its interval.
    """
    t_name, m_name, y_name = names
    (a_coef,) = ols_standardized(mediator, [time], [t_name])
    b_coef, c_coef = ols_standardized(outcome, [mediator, time], [m_name, t_name])
    (total_coef,) = ols_standardized(outcome, [time], [t_name])

    indirect = a_coef.beta * b_coef.beta
    sobel_se = float(
        np.sqrt(b_coef.beta**2 * a_coef.se**2 + a_coef.beta**2 * b_coef.se**2)
    )
    z = indirect / sobel_se if sobel_se > 0 else np.inf
    indirect_p = 2.0 * float(st.norm.sf(abs(z)))

    boot_ci = None
    boot_p = None
    if bootstrap:
        t_arr = _as_series(time, t_name)
        m_arr = _as_series(mediator, m_name)
        y_arr = _as_series(outcome, y_name)
        n = len(t_arr)
        rng = np.random.default_rng(seed)
        draws = []
        for _ in range(int(bootstrap)):
            idx = rng.integers(0, n, size=n)
            try:
                (a_b,) = ols_standardized(m_arr[idx], [t_arr[idx]], ["t"])
                b_b, _ = ols_standardized(y_arr[idx], [m_arr[idx], t_arr[idx]], ["m", "t"])
            except ValueError:  # degenerate resample
                continue
            draws.append(a_b.beta * b_b.beta)
        if draws:
            arr = np.asarray(draws)
            boot_ci = (
                float(np.percentile(arr, 2.5)),
                float(np.percentile(arr, 97.5)),
            )
            tail = min(float((arr <= 0).mean()), float((arr >= 0).mean()))
            boot_p = min(1.0, 2.0 * tail)

    return PathModel(
        a=Coefficient(f"{m_name}<-{t_name}", a_coef.beta, a_coef.se, a_coef.t, a_coef.p),
        b=Coefficient(f"{y_name}<-{m_name}", b_coef.beta, b_coef.se, b_coef.t, b_coef.p),
        c_direct=Coefficient(
            f"{y_name}<-{t_name}", c_coef.beta, c_coef.se, c_coef.t, c_coef.p
        ),
        total=Coefficient(
            f"{y_name}<-{t_name} (total)",
            total_coef.beta,
            total_coef.se,
            total_coef.t,
            total_coef.p,
        ),
        indirect=indirect,
        indirect_se=sobel_se,
        indirect_p=indirect_p,
        n=len(_as_series(time, t_name)),
        bootstrap_ci=boot_ci,
        bootstrap_p=boot_p,
    )


def session_series(records: Sequence[SessionRecord]) -> dict[str, np.ndarray]:
    """Column vectors used by the regression models, keyed by variable name."""
    return {
        "session": np.array([r.session for r in records], dtype=float),
        "bills": np.array([r.bills_introduced for r in records], dtype=float),
        "rate": np.array([r.passage_rate for r in records], dtype=float),
        "party": np.array([r.party_control for r in records], dtype=float),
        "coalition": np.array([r.coalition_control for r in records], dtype=float),
    }
