"""Partial-balance measures: triangle index and normalized frustration."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction

from .graph import SignedGraph, TriangleSet, enumerate_triangles, triangle_signs


class TriangleFreeError(ValueError):
    """Triangle index is undefined on a triangle-free graph."""


@dataclass(frozen=True)
class BalanceReport:
    """One network's balance summary; solver-derived fields are optional."""

    name: str
    n: int
    m: int
    m_neg: int
    m_pos: int
    density: float
    triangle_count: int
    triangle_index: float | None = None
    frustration_index: int | None = None
    normalized_frustration: float | None = None
    lower_bound: float | None = None

    def report_row(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "m": self.m,
            "m_neg": self.m_neg,
            "m_pos": self.m_pos,
            "density": f"{self.density:.6f}",
            "T": None if self.triangle_index is None else f"{self.triangle_index:.6f}",
            "L": self.frustration_index,
            "F": None
            if self.normalized_frustration is None
            else f"{self.normalized_frustration:.6f}",
            "Ystar": None if self.lower_bound is None else f"{self.lower_bound:.6f}",
        }


def triangle_index(g: SignedGraph, t: TriangleSet | None = None) -> float:
    """Fraction of triangles whose sign product is positive.

    Computed on exact integer triangle-sign counts, so dense graphs with
    millions of triangles lose nothing to float accumulation; equal to
    (Tr(A^3) + Tr(|A|^3)) / (2 Tr(|A|^3)).
    """
    if t is None:
        t = enumerate_triangles(g)
    if t.count == 0:
        raise TriangleFreeError("triangle index undefined: graph has no triangles")
    signs = triangle_signs(g, t)
    positive = int((signs > 0).sum())
    return float(Fraction(positive, t.count))


def normalized_frustration(frustration: int, m: int) -> float:
    """1 - 2L/m: 1 means balanced, lower means more frustration."""
    if m < 1:
        raise ValueError("normalized frustration undefined for m = 0")
    if not 0 <= frustration <= m:
        raise ValueError(f"frustration index {frustration} outside [0, {m}]")
    return 1.0 - 2.0 * frustration / m


def round_half_up(x: float, places: int) -> float:
    """Decimal half-up rounding, matching how the reference tables display values."""
    q = Decimal(1).scaleb(-places)
    return float(Decimal(repr(x)).quantize(q, rounding=ROUND_HALF_UP))


def balance_report(
    g: SignedGraph,
    name: str = "network",
    t: TriangleSet | None = None,
    frustration: int | None = None,
    lower_bound: float | None = None,
) -> BalanceReport:
    """Assemble a BalanceReport; triangle index left empty on triangle-free input."""
    if t is None:
        t = enumerate_triangles(g)
    try:
        ti = triangle_index(g, t)
    except TriangleFreeError:
        ti = None
    nf = None
    if frustration is not None:
        nf = normalized_frustration(frustration, g.edge_count)
    return BalanceReport(
        name=name,
        n=g.node_count,
        m=g.edge_count,
        m_neg=g.negative_edge_count,
        m_pos=g.positive_edge_count,
        density=g.density,
        triangle_count=t.count,
        triangle_index=ti,
        frustration_index=frustration,
        normalized_frustration=nf,
        lower_bound=lower_bound,
    )
