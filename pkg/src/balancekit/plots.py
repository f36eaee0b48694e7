"""Self-contained SVG line charts for session-level series."""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def line_chart(
    x: Sequence[float],
    series: dict[str, Sequence[float]],
    ylabel: str,
    path,
    xlabel: str = "session",
    deterministic: bool = False,
) -> None:
    """Write one SVG line chart; `deterministic` pins hash salt and drops the date."""
    if deterministic:
        plt.rcParams["svg.hashsalt"] = "balancekit"
    fig, ax = plt.subplots(figsize=(7, 4))
    for label, values in series.items():
        ax.plot(x, values, marker="o", markersize=3, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if len(series) > 1:
        ax.legend(frameon=False)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    metadata = {"Date": None} if deterministic else None
    fig.savefig(path, format="svg", metadata=metadata)
    plt.close(fig)


def session_charts(records, out_dir, deterministic: bool = False) -> list[str]:
    """Passage-rate, coalition-control, and party-control charts over sessions."""
    from pathlib import Path

    from .stats import session_series

    series = session_series(records)
    out_dir = Path(out_dir)
    written = []
    for name, ylabel in (
        ("rate", "bill passage rate"),
        ("coalition", "coalition control"),
        ("party", "party control"),
    ):
        path = out_dir / f"{name}_over_sessions.svg"
        line_chart(
            series["session"],
            {ylabel: series[name]},
            ylabel,
            path,
            deterministic=deterministic,
        )
        written.append(str(path))
    return written
