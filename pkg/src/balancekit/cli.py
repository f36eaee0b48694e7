"""Command-line front end: balance, solve, backbone, mediate, report, pipeline."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .backbone import (
    BipartiteGraph,
    extract_signed_backbone,
    fit_cell_probabilities,
    sample_null_projection,
)
from .graph import GraphFormatError, SignedGraph
from .io import (
    bundled_table,
    read_adjacency_csv,
    read_attributes_csv,
    read_bipartite_csv,
    read_edge_list_csv,
    read_session_csv,
    write_edge_list_csv,
    write_partition_csv,
    write_report_csv,
)
from .metrics import balance_report
from .solver import BoundConfig, SolveConfig, compute_bounds, solve_exact
from .stats import SessionRecord, mediation_model, session_series

log = logging.getLogger("balancekit.cli")


@dataclass
class RunManifest:
    """Reproducibility record written next to every command's outputs."""

    command: str
    inputs: list[str]
    config: dict
    seed: int
    tool_version: str = __version__
    wall_time: float = 0.0
    outputs: list[str] = field(default_factory=list)
    certification: dict = field(default_factory=dict)

    def write(self, out_dir: Path) -> Path:
        path = out_dir / "manifest.json"
        self.outputs.append(str(path))
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")
        return path


def _read_graph(path: str) -> SignedGraph:
    """Sniff edge-list vs adjacency format from the header row."""
    with open(path, encoding="utf-8") as f:
        for line in f:
            stripped = line.strip()
            if stripped and not stripped.startswith("#"):
                first = stripped.lower().replace(" ", "")
                break
        else:
            raise GraphFormatError(f"{path}: empty file")
    if first.startswith("source,target,sign"):
        return read_edge_list_csv(path)
    return read_adjacency_csv(path)


def _json_out(payload: dict, path: Path) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _solve_with_flags(g, args, manifest):
    attrs = read_attributes_csv(args.attrs) if args.attrs else None
    bound_config = BoundConfig(tier=args.tier)
    bounds = compute_bounds(g, attrs=attrs, bound_config=bound_config)
    config = SolveConfig(
        node_budget=args.node_budget,
        time_budget=args.time_budget,
        log_interval=args.log_interval,
    )
    result = solve_exact(g, bounds, config)
    manifest.certification["certified"] = result.certified
    manifest.certification["status"] = result.status
    # co-optimal partitions may exist; the reported one is the deterministic
    # first improvement found by the DFS with component roots pinned to 0
    manifest.certification["partition_rule"] = "deterministic-dfs-first-optimum"
    return bounds, result


def cmd_balance(args) -> int:
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    manifest = RunManifest(
        command="balance",
        inputs=[args.graph] + ([args.attrs] if args.attrs else []),
        config={"exact": args.exact, "tier": args.tier},
        seed=args.seed,
    )
    g = _read_graph(args.graph)
    name = args.name or Path(args.graph).stem

    frustration = None
    lower = None
    exit_code = 0
    if args.exact:
        bounds, result = _solve_with_flags(g, args, manifest)
        frustration = result.frustration_index
        lower = bounds.lower
        partition_path = out_dir / f"{name}_partition.csv"
        write_partition_csv(g, result.optimal_partition, partition_path)
        manifest.outputs.append(str(partition_path))
        if not result.certified:
            print(f"warning: {result.status}", file=sys.stderr)
            if not args.allow_uncertified:
                exit_code = 1

    report = balance_report(g, name=name, frustration=frustration, lower_bound=lower)
    if report.triangle_index is None:
        print("warning: triangle index undefined (no triangles)", file=sys.stderr)
    report_path = out_dir / f"{name}_report.csv"
    write_report_csv([report.report_row()], report_path)
    manifest.outputs.append(str(report_path))
    manifest.wall_time = time.perf_counter() - t0
    manifest.write(out_dir)
    print(report_path)
    return exit_code


def cmd_solve(args) -> int:
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    manifest = RunManifest(
        command="solve",
        inputs=[args.graph] + ([args.attrs] if args.attrs else []),
        config={
            "tier": args.tier,
            "node_budget": args.node_budget,
            "time_budget": args.time_budget,
        },
        seed=args.seed,
    )
    g = _read_graph(args.graph)
    name = args.name or Path(args.graph).stem
    bounds, result = _solve_with_flags(g, args, manifest)

    partition_path = out_dir / f"{name}_partition.csv"
    write_partition_csv(g, result.optimal_partition, partition_path)
    payload = {
        "L": result.frustration_index,
        "F": 1.0 - 2.0 * result.frustration_index / g.edge_count
        if g.edge_count
        else 1.0,
        "Ystar": bounds.lower,
        "lower_method": bounds.lower_method,
        "certified": result.certified,
        "status": result.status,
        "nodes_explored": result.node_count_explored,
        "partition_path": str(partition_path),
        "wall_time": result.wall_time,
    }
    json_path = out_dir / f"{name}_solve.json"
    _json_out(payload, json_path)
    manifest.outputs.extend([str(partition_path), str(json_path)])
    manifest.wall_time = time.perf_counter() - t0
    manifest.write(out_dir)
    print(json.dumps(payload, indent=2, sort_keys=True))
    if not result.certified:
        print(f"warning: {result.status}", file=sys.stderr)
        if not args.allow_uncertified:
            return 1
    return 0


def _run_backbone(bipartite_path, alpha, replicates, seed, workers):
    rows, cols, inc = read_bipartite_csv(bipartite_path)
    b = BipartiteGraph(incidence=inc, row_labels=tuple(rows), col_labels=tuple(cols))
    nm = fit_cell_probabilities(b)
    dists = sample_null_projection(
        nm, replicates=replicates, seed=seed, workers=workers
    )
    g = extract_signed_backbone(b, dists, alpha=alpha)
    summary = {
        "pairs_tested": len(dists),
        "pos_edges": g.positive_edge_count,
        "neg_edges": g.negative_edge_count,
        "alpha": alpha,
        "replicates": replicates,
        "seed": seed,
    }
    return g, summary


def cmd_backbone(args) -> int:
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    manifest = RunManifest(
        command="backbone",
        inputs=[args.bipartite],
        config={"alpha": args.alpha, "replicates": args.replicates},
        seed=args.seed,
    )
    g, summary = _run_backbone(
        args.bipartite, args.alpha, args.replicates, args.seed, args.threads
    )
    edge_path = Path(args.output) if args.output else out_dir / "backbone_edges.csv"
    write_edge_list_csv(g, edge_path)
    json_path = out_dir / "backbone_summary.json"
    _json_out(summary, json_path)
    manifest.outputs.extend([str(edge_path), str(json_path)])
    manifest.wall_time = time.perf_counter() - t0
    manifest.write(out_dir)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def _load_sessions(args) -> tuple[list[SessionRecord], list[str]]:
    if args.sessions:
        rows = read_session_csv(args.sessions)
        inputs = [args.sessions]
    else:
        rows = bundled_table(f"{args.chamber}_sessions")
        inputs = [f"bundled:{args.chamber}_sessions"]
    return [SessionRecord.from_row(r) for r in rows], inputs


def _mediation_payload(records, mediator_name, bootstrap, seed):
    series = session_series(records)
    model = mediation_model(
        series["session"],
        series[mediator_name],
        series["rate"],
        bootstrap=bootstrap,
        seed=seed,
        names=("session", mediator_name, "rate"),
    )
    return model


def _write_coefficient_csv(model, path: Path) -> None:
    import csv

    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["path", "beta", "se", "t", "p", "sig"])
        for c in (model.a, model.b, model.c_direct, model.total):
            w.writerow(
                [c.name, f"{c.beta:.6f}", f"{c.se:.6f}", f"{c.t:.4f}", f"{c.p:.6f}", c.stars()]
            )
        w.writerow(
            [
                "indirect",
                f"{model.indirect:.6f}",
                f"{model.indirect_se:.6f}",
                "",
                f"{model.indirect_p:.6f}",
                model.indirect_stars,
            ]
        )


def cmd_mediate(args) -> int:
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    records, inputs = _load_sessions(args)
    manifest = RunManifest(
        command="mediate",
        inputs=inputs,
        config={"mediator": args.mediator, "bootstrap": args.bootstrap},
        seed=args.seed,
    )
    model = _mediation_payload(records, args.mediator, args.bootstrap, args.seed)
    json_path = out_dir / f"mediation_{args.mediator}.json"
    _json_out(model.to_dict(), json_path)
    coef_path = out_dir / f"mediation_{args.mediator}_coefficients.csv"
    _write_coefficient_csv(model, coef_path)
    manifest.outputs.extend([str(json_path), str(coef_path)])
    if args.plots:
        from .plots import session_charts

        manifest.outputs.extend(
            session_charts(records, out_dir, deterministic=args.deterministic)
        )
    manifest.wall_time = time.perf_counter() - t0
    manifest.write(out_dir)
    print(json.dumps(model.to_dict(), indent=2, sort_keys=True))
    return 0


def cmd_report(args) -> int:
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    manifest = RunManifest(
        command="report",
        inputs=list(args.graphs),
        config={"exact": args.exact, "tier": args.tier},
        seed=args.seed,
    )
    rows = []
    all_certified = True
    for path in args.graphs:
        g = _read_graph(path)
        name = Path(path).stem
        frustration = None
        lower = None
        if args.exact:
            bounds, result = _solve_with_flags(g, args, manifest)
            frustration = result.frustration_index
            lower = bounds.lower
            all_certified &= result.certified
        rows.append(
            balance_report(g, name=name, frustration=frustration, lower_bound=lower).report_row()
        )
    report_path = out_dir / "report.csv"
    write_report_csv(rows, report_path)
    manifest.outputs.append(str(report_path))
    manifest.certification["certified"] = all_certified
    manifest.wall_time = time.perf_counter() - t0
    manifest.write(out_dir)
    print(report_path)
    return 0 if (all_certified or args.allow_uncertified) else 1


def cmd_pipeline(args) -> int:
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    manifest = RunManifest(
        command="pipeline",
        inputs=[],
        config={
            "alpha": args.alpha,
            "replicates": args.replicates,
            "tier": args.tier,
            "stats_only": args.stats_only,
        },
        seed=args.seed,
    )
    stage = "setup"
    consolidated: dict = {}
    try:
        if not args.stats_only:
            if not args.bipartite:
                raise ValueError("pipeline requires --bipartite (or --stats-only)")
            if not args.attrs:
                raise ValueError("warm-start requires attributes (--attrs)")
            stage = "backbone"
            manifest.inputs.append(args.bipartite)
            g, summary = _run_backbone(
                args.bipartite, args.alpha, args.replicates, args.seed, args.threads
            )
            edge_path = out_dir / "backbone_edges.csv"
            write_edge_list_csv(g, edge_path)
            manifest.outputs.append(str(edge_path))
            consolidated["backbone"] = summary

            stage = "solve"
            manifest.inputs.append(args.attrs)
            attrs = read_attributes_csv(args.attrs)
            if not set(g.nodes) <= set(attrs.party):
                raise ValueError("warm-start requires attributes covering every node")
            bounds = compute_bounds(g, attrs=attrs, bound_config=BoundConfig(tier=args.tier))
            result = solve_exact(
                g,
                bounds,
                SolveConfig(node_budget=args.node_budget, time_budget=args.time_budget),
            )
            partition_path = out_dir / "pipeline_partition.csv"
            write_partition_csv(g, result.optimal_partition, partition_path)
            manifest.outputs.append(str(partition_path))
            manifest.certification["certified"] = result.certified
            manifest.certification["status"] = result.status
            consolidated["solve"] = {
                "L": result.frustration_index,
                "F": 1.0 - 2.0 * result.frustration_index / g.edge_count
                if g.edge_count
                else 1.0,
                "Ystar": bounds.lower,
                "certified": result.certified,
            }

            stage = "coalition"
            from .stats import coalition_partisanship

            size, dems, reps, control = coalition_partisanship(
                g, result.optimal_partition, attrs
            )
            consolidated["coalition"] = {
                "size": size,
                "dems": dems,
                "reps": reps,
                "control": control,
            }

        stage = "mediation"
        if not (args.sessions or args.chamber):
            raise ValueError("pipeline requires --sessions or --chamber")
        records, inputs = _load_sessions(args)
        manifest.inputs.extend(inputs)
        consolidated["mediation"] = {
            mediator: _mediation_payload(records, mediator, args.bootstrap, args.seed).to_dict()
            for mediator in ("coalition", "party")
        }
        from .plots import session_charts

        manifest.outputs.extend(
            session_charts(records, out_dir, deterministic=args.deterministic)
        )
    except Exception as exc:
        json_path = out_dir / "pipeline.json"
        _json_out(consolidated, json_path)
        manifest.outputs.append(str(json_path))
        manifest.wall_time = time.perf_counter() - t0
        manifest.write(out_dir)
        print(f"pipeline stage {stage!r} failed: {exc}", file=sys.stderr)
        return 1

    json_path = out_dir / "pipeline.json"
    _json_out(consolidated, json_path)
    manifest.outputs.append(str(json_path))
    manifest.wall_time = time.perf_counter() - t0
    manifest.write(out_dir)
    print(json_path)
    certified = manifest.certification.get("certified", True)
    return 0 if (certified or args.allow_uncertified) else 1


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--attrs", help="node,party attribute CSV for the warm start")
    p.add_argument("--tier", default="auto", help="LP bound tier: 0, 1, 2, or auto")
    p.add_argument("--node-budget", type=int, default=1_000_000)
    p.add_argument("--time-budget", type=float, default=600.0)
    p.add_argument("--log-interval", type=int, default=0, help="progress every N nodes")
    p.add_argument("--allow-uncertified", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="balancekit",
        description="Signed-network balance, exact frustration partitioning, "
        "SDSM backbone extraction, and legislative effectiveness statistics.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--deterministic", action="store_true")
    common.add_argument("--output-dir", default=".")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("balance", parents=[common], help="triangle index / balance row")
    p.add_argument("graph", help="edge-list or adjacency CSV")
    p.add_argument("--name")
    p.add_argument("--exact", action="store_true", help="also solve for L(G)")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_balance)

    p = sub.add_parser("solve", parents=[common], help="exact frustration index")
    p.add_argument("graph")
    p.add_argument("--name")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("backbone", parents=[common], help="SDSM signed backbone")
    p.add_argument("bipartite", help="legislator,bill events or dense 0/1 CSV")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--replicates", type=int, default=10_000)
    p.add_argument("--output", help="edge-list CSV path")
    p.set_defaults(func=cmd_backbone)

    p = sub.add_parser("mediate", parents=[common], help="mediation path model")
    p.add_argument("--sessions", help="session table CSV")
    p.add_argument("--chamber", choices=["senate", "house"], help="bundled table")
    p.add_argument("--mediator", choices=["coalition", "party"], default="coalition")
    p.add_argument("--bootstrap", type=int, default=None)
    p.add_argument("--plots", action="store_true")
    p.set_defaults(func=cmd_mediate)

    p = sub.add_parser("report", parents=[common], help="balance rows for many graphs")
    p.add_argument("graphs", nargs="+")
    p.add_argument("--exact", action="store_true")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("pipeline", parents=[common], help="backbone -> solve -> stats")
    p.add_argument("--bipartite")
    p.add_argument("--sessions")
    p.add_argument("--chamber", choices=["senate", "house"])
    p.add_argument("--stats-only", action="store_true")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--replicates", type=int, default=10_000)
    p.add_argument("--bootstrap", type=int, default=None)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GraphFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
