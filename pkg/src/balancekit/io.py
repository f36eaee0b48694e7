"""CSV ingestion and emission for graphs, attributes, partitions, and tables."""

from __future__ import annotations

import csv
import io as _io
from importlib import resources
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from .graph import GraphFormatError, NodeAttributes, Partition, SignedGraph, from_edge_list


def _open(path_or_file, mode="r"):
    if hasattr(path_or_file, "read") or hasattr(path_or_file, "write"):
        return path_or_file, False
    return open(path_or_file, mode, encoding="utf-8", newline=""), True


def _rows(f: TextIO):
    """CSV rows with 1-based line numbers, skipping blanks and # comments."""
    for lineno, line in enumerate(f, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield lineno, next(csv.reader([line]))


def read_edge_list_csv(path_or_file) -> SignedGraph:
    """Read a `source,target,sign` edge list; sign must be -1 or 1."""
    f, close = _open(path_or_file)
    try:
        rows = []
        header_seen = False
        for lineno, cells in _rows(f):
            if not header_seen:
                header = [c.strip().lower() for c in cells]
                if header[:3] != ["source", "target", "sign"]:
                    raise GraphFormatError(
                        f"line {lineno}: expected header source,target,sign"
                    )
                header_seen = True
                continue
            if len(cells) < 3:
                raise GraphFormatError(f"line {lineno}: expected 3 columns")
            u, v, raw = cells[0].strip(), cells[1].strip(), cells[2].strip()
            try:
                s = int(raw)
            except ValueError:
                raise GraphFormatError(
                    f"line {lineno}: sign {raw!r} is not an integer"
                ) from None
            if s not in (-1, 1):
                raise GraphFormatError(f"line {lineno}: sign must be -1 or 1, got {s}")
            rows.append((u, v, s))
        if not header_seen:
            raise GraphFormatError("empty edge-list file")
        return from_edge_list(rows)
    finally:
        if close:
            f.close()


def write_edge_list_csv(g: SignedGraph, path_or_file) -> None:
    f, close = _open(path_or_file, "w")
    try:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["source", "target", "sign"])
        for u, v, s in g.edge_list():
            w.writerow([u, v, s])
    finally:
        if close:
            f.close()


def read_adjacency_csv(path_or_file) -> SignedGraph:
    """Read a square signed adjacency CSV with node ids in row 1 / column 1.

    Cells must be -1, 0, or 1; the matrix must be symmetric with a zero
    diagonal. Asymmetry is reported with the offending cell.
    """
    f, close = _open(path_or_file)
    try:
        table = [cells for _, cells in _rows(f)]
    finally:
        if close:
            f.close()
    if not table:
        raise GraphFormatError("empty adjacency file")
    ids = [c.strip() for c in table[0][1:]]
    n = len(ids)
    if len(table) != n + 1:
        raise GraphFormatError(
            f"adjacency matrix has {len(table) - 1} rows for {n} columns"
        )
    a = np.zeros((n, n), dtype=np.int64)
    for i, row in enumerate(table[1:]):
        if row[0].strip() != ids[i]:
            raise GraphFormatError(
                f"row label {row[0].strip()!r} != column label {ids[i]!r}"
            )
        if len(row) != n + 1:
            raise GraphFormatError(f"row {ids[i]!r}: expected {n + 1} cells")
        for j, cell in enumerate(row[1:]):
            try:
                val = int(cell.strip())
            except ValueError:
                raise GraphFormatError(
                    f"cell ({ids[i]}, {ids[j]}): {cell!r} is not an integer"
                ) from None
            if val not in (-1, 0, 1):
                raise GraphFormatError(
                    f"cell ({ids[i]}, {ids[j]}): value must be -1, 0, or 1"
                )
            a[i, j] = val
    for i in range(n):
        if a[i, i] != 0:
            raise GraphFormatError(f"cell ({ids[i]}, {ids[i]}): nonzero diagonal")
        for j in range(i + 1, n):
            if a[i, j] != a[j, i]:
                raise GraphFormatError(
                    f"cell ({ids[j]}, {ids[i]}): asymmetric, "
                    f"{a[j, i]} vs {a[i, j]} at ({ids[i]}, {ids[j]})"
                )
    edges = [
        (ids[i], ids[j], int(a[i, j]))
        for i in range(n)
        for j in range(i + 1, n)
        if a[i, j] != 0
    ]
    return from_edge_list(edges, nodes=ids)


def read_attributes_csv(path_or_file) -> NodeAttributes:
    """Read a `node,party` attribute table; party in {D, R, I}."""
    f, close = _open(path_or_file)
    try:
        party: dict[str, str] = {}
        header_seen = False
        for lineno, cells in _rows(f):
            if not header_seen:
                header = [c.strip().lower() for c in cells]
                if header[:2] != ["node", "party"]:
                    raise GraphFormatError(f"line {lineno}: expected header node,party")
                header_seen = True
                continue
            if len(cells) < 2:
                raise GraphFormatError(f"line {lineno}: expected 2 columns")
            node = cells[0].strip()
            if node in party:
                raise GraphFormatError(f"line {lineno}: duplicate node {node!r}")
            try:
                party[node] = NodeAttributes.normalize_party(cells[1])
            except ValueError as exc:
                raise GraphFormatError(f"line {lineno}: {exc}") from None
        if not header_seen:
            raise GraphFormatError("empty attribute file")
        return NodeAttributes(party=party)
    finally:
        if close:
            f.close()


def write_partition_csv(g: SignedGraph, p: Partition, path_or_file) -> None:
    """Write `node,coalition` rows in node-index order."""
    f, close = _open(path_or_file, "w")
    try:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["node", "coalition"])
        for v, b in zip(g.nodes, p.bits):
            w.writerow([v, b])
    finally:
        if close:
            f.close()


def read_partition_csv(g: SignedGraph, path_or_file) -> Partition:
    f, close = _open(path_or_file)
    try:
        bits = {}
        header_seen = False
        for lineno, cells in _rows(f):
            if not header_seen:
                header_seen = True
                continue
            node, raw = cells[0].strip(), cells[1].strip()
            if node not in g.index:
                raise GraphFormatError(f"line {lineno}: unknown node {node!r}")
            if raw not in ("0", "1"):
                raise GraphFormatError(f"line {lineno}: coalition must be 0 or 1")
            bits[g.index[node]] = int(raw)
        missing = set(range(g.node_count)) - set(bits)
        if missing:
            names = sorted(g.nodes[i] for i in missing)
            raise GraphFormatError(f"partition missing nodes: {names[:5]}")
        return Partition(tuple(bits[i] for i in range(g.node_count)))
    finally:
        if close:
            f.close()


def read_bipartite_csv(path_or_file):
    """Read bipartite incidence: sparse `legislator,bill` events or a dense 0/1 matrix.

    Sparse format is detected by its two-column header. Dense format mirrors
    the adjacency layout: row 1 holds bill/column ids, column 1 row ids.
    Returns (row_labels, col_labels, incidence matrix).
    """
    f, close = _open(path_or_file)
    try:
        table = [(lineno, cells) for lineno, cells in _rows(f)]
    finally:
        if close:
            f.close()
    if not table:
        raise GraphFormatError("empty bipartite file")
    header = [c.strip().lower() for c in table[0][1]]
    if header[:2] == ["legislator", "bill"] and len(header) <= 2:
        rows_order: list[str] = []
        cols_order: list[str] = []
        events: set[tuple[str, str]] = set()
        for lineno, cells in table[1:]:
            if len(cells) < 2:
                raise GraphFormatError(f"line {lineno}: expected 2 columns")
            leg, bill = cells[0].strip(), cells[1].strip()
            if not leg or not bill:
                raise GraphFormatError(f"line {lineno}: empty identifier")
            if leg not in rows_order:
                rows_order.append(leg)
            if bill not in cols_order:
                cols_order.append(bill)
            events.add((leg, bill))
        b = np.zeros((len(rows_order), len(cols_order)), dtype=np.int8)
        ridx = {v: i for i, v in enumerate(rows_order)}
        cidx = {v: i for i, v in enumerate(cols_order)}
        for leg, bill in events:
            b[ridx[leg], cidx[bill]] = 1
        return rows_order, cols_order, b
    # dense matrix
    col_labels = [c.strip() for c in table[0][1][1:]]
    row_labels = []
    data = []
    for lineno, cells in table[1:]:
        if len(cells) != len(col_labels) + 1:
            raise GraphFormatError(
                f"line {lineno}: expected {len(col_labels) + 1} cells"
            )
        row_labels.append(cells[0].strip())
        try:
            vals = [int(c.strip()) for c in cells[1:]]
        except ValueError:
            raise GraphFormatError(f"line {lineno}: non-integer cell") from None
        if any(v not in (0, 1) for v in vals):
            raise GraphFormatError(f"line {lineno}: incidence cells must be 0 or 1")
        data.append(vals)
    return row_labels, col_labels, np.asarray(data, dtype=np.int8)


SESSION_COLUMNS = ("session", "dems", "reps", "cc_size", "dems_cc", "reps_cc", "bills", "laws")


def read_session_csv(path_or_file) -> list[dict]:
    """Read a session table (Table S2/S4 layout); extra columns pass through."""
    f, close = _open(path_or_file)
    try:
        reader = csv.DictReader(
            line for line in f if line.strip() and not line.lstrip().startswith("#")
        )
        missing = [c for c in SESSION_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise GraphFormatError(f"session table missing columns: {missing}")
        out = []
        for row in reader:
            rec = dict(row)
            for c in SESSION_COLUMNS:
                rec[c] = int(row[c])
            out.append(rec)
        if not out:
            raise GraphFormatError("session table has no rows")
        return out
    finally:
        if close:
            f.close()


def bundled_table(name: str) -> list[dict]:
    """Load a packaged fixture table by name, e.g. 'senate_sessions'."""
    text = resources.files("balancekit.data").joinpath(f"{name}.csv").read_text()
    if name.endswith("_sessions"):
        return read_session_csv(_io.StringIO(text))
    return list(csv.DictReader(_io.StringIO(text)))


def bundled_path(name: str) -> Path:
    """Filesystem path of a packaged fixture CSV (for CLI defaults)."""
    with resources.as_file(resources.files("balancekit.data").joinpath(f"{name}.csv")) as p:
        return Path(p)


def write_report_csv(rows: Iterable[dict], path_or_file) -> None:
    """Emit per-network report rows: name,n,m,m_neg,m_pos,density,T,L,F,Ystar."""
    cols = ["name", "n", "m", "m_neg", "m_pos", "density", "T", "L", "F", "Ystar"]
    f, close = _open(path_or_file, "w")
    try:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(cols)
        for row in rows:
            w.writerow([("" if row.get(c) is None else row.get(c)) for c in cols])
    finally:
        if close:
            f.close()
