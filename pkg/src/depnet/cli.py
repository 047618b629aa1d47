"""Command-line front end.

Every command that writes a CSV (or graph/cache file) also writes
``<out>.manifest.json`` holding the parameters, seed, input digests, tool
version and run time needed to repeat it.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import random
import sys
import time
from pathlib import Path
from typing import Any, Callable, Sequence

from . import __version__
from .centrality import PageRankConfig, Strategy, descending_order, pagerank
from .community import ALLOWED_STEPS, louvain, to_undirected, top_package_study
from .errors import DepnetError
from .evolution import evolution_report
from .generators import GeneratorConfig, gnm_random, preferential_attachment
from .graph import (
    DependencyGraph,
    labels_path_for,
    largest_weakly_connected_subgraph,
    read_edge_list,
    weakly_connected_components,
    write_edge_list,
)
from .registry import latest_edges, parse_cutoff, parse_registry_dump, read_cache, snapshot_edges, write_cache
from .robustness import cascade_attack, compare_to_random_baseline, connectivity_attack

logger = logging.getLogger("depnet")

CACHE_ENV = "DEPNET_CACHE_DIR"


def default_cache_dir() -> Path:
    return Path(os.environ.get(CACHE_ENV) or Path.home() / ".cache" / "depnet")


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _sha256(path: str | os.PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _fmt(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def _write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _resolve_seed(args: argparse.Namespace) -> int:
    if getattr(args, "seed", None) is None:
        args.seed = random.SystemRandom().randrange(2**32)
        print(f"seed: {args.seed}", file=sys.stderr)
    return args.seed


class Run:
    """Collects what goes into a manifest while a command executes."""

    def __init__(self, command: str, args: argparse.Namespace, argv: Sequence[str]):
        self.command = command
        self.args = args
        self.argv = list(argv)
        self.inputs: dict[str, str] = {}
        self.outputs: list[str] = []
        self.results: dict[str, Any] = {}
        self.started = time.perf_counter()

    def input(self, path: str) -> str:
        self.inputs[path] = _sha256(path)
        return path

    def output(self, path: str) -> str:
        self.outputs.append(path)
        return path

    def write_manifest(self, out: str) -> None:
        params = {k: v for k, v in vars(self.args).items() if k not in ("func", "verbose")}
        manifest = {
            "command": self.command,
            "argv": self.argv,
            "parameters": params,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "results": self.results,
            "tool_version": __version__,
            "duration_seconds": round(time.perf_counter() - self.started, 6),
        }
        with open(out + ".manifest.json", "w", encoding="utf-8", newline="\n") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")


def _pagerank_config(args: argparse.Namespace) -> PageRankConfig:
    return PageRankConfig(args.damping, args.tol, args.max_iter)


def _load_graph(run: Run, path: str) -> DependencyGraph:
    run.input(path)
    side = labels_path_for(path)
    if os.path.exists(side):
        run.input(side)
    return read_edge_list(path)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_ingest(run: Run) -> None:
    a = run.args
    out = a.out or str(default_cache_dir() / "registry.jsonl.gz")
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    report = parse_registry_dump(run.input(a.dump))
    write_cache(report.records, run.output(out))
    run.results.update(
        packages=len(report.records),
        malformed_lines=len(report.errors),
        skipped_documents=report.skipped_documents,
        dropped_versions=report.dropped_versions,
        duplicate_names=report.duplicate_names,
    )
    for lineno, msg in report.errors[:20]:
        logger.warning("line %d: %s", lineno, msg)
    print(f"{len(report.records)} packages -> {out}")
    run.write_manifest(out)


def cmd_snapshot(run: Run) -> None:
    a = run.args
    records = read_cache(run.input(a.cache))
    snap = latest_edges(records) if a.cutoff == "latest" else snapshot_edges(records, parse_cutoff(a.cutoff))
    g = snap.to_graph()
    if a.lwcc and g.node_count:
        g = largest_weakly_connected_subgraph(g)
    write_edge_list(g, run.output(a.out))
    run.output(labels_path_for(a.out))
    run.results.update(nodes=g.node_count, edges=g.edge_count, dropped_edges=snap.dropped_edges)
    print(f"nodes={g.node_count} edges={g.edge_count} dropped_edges={snap.dropped_edges}")
    run.write_manifest(a.out)


def cmd_generate(run: Run) -> None:
    a = run.args
    seed = _resolve_seed(a)
    if a.model == "gnm":
        if a.edges is None:
            raise DepnetError("--model gnm requires --edges")
        g = gnm_random(GeneratorConfig(a.nodes, edge_count=a.edges, seed=seed))
    else:
        if a.epn is None:
            raise DepnetError("--model pa requires --epn")
        g = preferential_attachment(GeneratorConfig(a.nodes, edges_per_node=a.epn, seed=seed))
    write_edge_list(g, run.output(a.out))
    run.output(labels_path_for(a.out))
    run.results.update(nodes=g.node_count, edges=g.edge_count)
    run.write_manifest(a.out)


def cmd_pagerank(run: Run) -> None:
    a = run.args
    g = _load_graph(run, a.edges)
    res = pagerank(g, _pagerank_config(a))
    if not res.converged:
        logger.warning("pagerank did not converge in %d iterations (residual %.3g)", res.iterations, res.residual)
    order = descending_order(res.scores).tolist()
    _write_csv(run.output(a.out), ["node_label", "score"], [(g.label(v), _fmt(res.scores[v])) for v in order])
    run.results.update(iterations=res.iterations, converged=res.converged, residual=res.residual)
    run.write_manifest(a.out)


def cmd_attack_cascade(run: Run) -> None:
    a = run.args
    seed = _resolve_seed(a)
    g = _load_graph(run, a.edges)
    trace = cascade_attack(
        g, a.strategy, a.stop_fraction, seed, rerank=a.rerank, pagerank_config=_pagerank_config(a)
    )
    rows = [
        (s.step, s.target_label, s.removed_count, _fmt(s.cumulative_affected_fraction)) for s in trace.steps
    ]
    _write_csv(
        run.output(a.out), ["step", "target_label", "removed_this_step", "cumulative_affected_fraction"], rows
    )
    run.results.update(steps=len(trace.steps), final_affected_fraction=trace.fractions[-1] if trace.steps else 0.0)
    run.write_manifest(a.out)


def cmd_attack_connectivity(run: Run) -> None:
    a = run.args
    seed = _resolve_seed(a)
    g = _load_graph(run, a.edges)
    cfg = _pagerank_config(a)
    if a.baseline:
        cmp = compare_to_random_baseline(g, a.strategy, a.batch_fraction, a.max_fraction, seed, pagerank_config=cfg)
        header = ["removed_fraction", "lcc_fraction", "baseline_lcc_fraction"]
        rows = [tuple(_fmt(x) for x in r) for r in cmp.rows()]
    else:
        trace = connectivity_attack(g, a.strategy, a.batch_fraction, a.max_fraction, seed, pagerank_config=cfg)
        header = ["removed_fraction", "lcc_fraction"]
        rows = [(_fmt(p.removed_fraction), _fmt(p.lcc_fraction)) for p in trace.points]
    _write_csv(run.output(a.out), header, rows)
    run.write_manifest(a.out)


def cmd_evolution(run: Run) -> None:
    a = run.args
    records = read_cache(run.input(a.cache))
    cutoffs = [parse_cutoff(c) for c in a.cutoffs.split(",") if c.strip()]
    report = evolution_report(records, cutoffs, lwcc=a.lwcc, config=_pagerank_config(a), threads=a.threads)
    rows = [
        (r.year, _fmt(r.avg_out_degree_all), _fmt(r.avg_out_degree_top50), _fmt(r.avg_dependence_top100))
        for r in report.rows
    ]
    header = ["year", "avg_out_degree_all", "avg_out_degree_top50", "avg_dependence_top100"]
    _write_csv(run.output(a.out), header, rows)
    run.results.update(empty_snapshots=report.empty_snapshots, nodes=[r.node_count for r in report.rows])
    run.write_manifest(a.out)


def cmd_communities(run: Run) -> None:
    a = run.args
    seed = _resolve_seed(a)
    g = _load_graph(run, a.edges)
    ks = sorted({int(k) for k in a.k.split(",") if k.strip()})
    part = louvain(to_undirected(g), a.resolution, seed)
    reports = top_package_study(
        g,
        min(a.top, g.node_count),
        ks,
        seed,
        partition=part,
        include_root=not a.exclude_root,
        pagerank_config=_pagerank_config(a),
        threads=a.threads,
    )
    header = [
        "package",
        "k",
        "community_size",
        "neighborhood_size",
        "intersection_size",
        "frac_of_community",
        "frac_of_neighborhood",
        "dependencies",
    ]
    rows = [
        (
            r.package,
            r.k,
            r.community_size,
            r.neighborhood_size,
            r.intersection_size,
            _fmt(r.frac_of_community),
            _fmt(r.frac_of_neighborhood),
            r.dependencies,
        )
        for r in reports
    ]
    _write_csv(run.output(a.out), header, rows)
    run.results.update(modularity=part.modularity, communities=part.community_count, levels=part.levels)
    run.write_manifest(a.out)


def cmd_stats(run: Run) -> None:
    g = _load_graph(run, run.args.edges)
    n, m = g.node_count, g.edge_count
    comps = weakly_connected_components(g)
    lcc = int(comps.component_sizes.max()) if n else 0
    lines = [
        f"nodes: {n}",
        f"edges: {m}",
        f"avg_out_degree (m/n): {m / n if n else 0.0:.6g}",
        f"avg_total_degree (2m/n): {2 * m / n if n else 0.0:.6g}",
        f"weak_components: {comps.count}",
        f"lcc_nodes: {lcc}",
        f"lcc_fraction: {comps.lcc_fraction:.6g}",
    ]
    print("\n".join(lines))


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_pagerank_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--damping", type=float, default=0.85)
    p.add_argument("--tol", type=float, default=1e-10, help="L1 convergence threshold")
    p.add_argument("--max-iter", type=int, default=200)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threads", type=int, default=1, help="worker cap for parallel steps")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="depnet", description="Dependency-network robustness analysis.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def command(name: str, func: Callable[[Run], None], help: str, parent=sub) -> argparse.ArgumentParser:
        p = parent.add_parser(name, help=help, description=help)
        p.set_defaults(func=func)
        _add_common(p)
        return p

    p = command("ingest", cmd_ingest, "parse a registry dump into a record cache")
    p.add_argument("--dump", required=True, help="NDJSON or rows-wrapper dump, optionally gzipped")
    p.add_argument("--out", help=f"cache path (default: ${CACHE_ENV}/registry.jsonl.gz)")

    p = command("snapshot", cmd_snapshot, "write the edge list of the network at a cutoff")
    p.add_argument("--cache", required=True)
    p.add_argument("--cutoff", required=True, help="ISO-8601 timestamp, date, year, or 'latest'")
    p.add_argument("--out", required=True)
    p.add_argument("--lwcc", action="store_true", help="keep only the largest weakly connected component")

    p = command("generate", cmd_generate, "generate a synthetic graph")
    p.add_argument("--model", choices=["gnm", "pa"], required=True)
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--edges", type=int, help="edge count (gnm)")
    p.add_argument("--epn", type=int, help="edges per new node (pa)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)

    p = command("pagerank", cmd_pagerank, "PageRank scores as CSV")
    p.add_argument("--edges", required=True)
    p.add_argument("--out", required=True)
    _add_pagerank_flags(p)

    attack = sub.add_parser("attack", help="robustness attack simulations")
    attack_sub = attack.add_subparsers(dest="attack", required=True, metavar="KIND")

    p = command("cascade", cmd_attack_cascade, "failure cascade to transitive dependents", attack_sub)
    p.add_argument("--edges", required=True)
    p.add_argument("--strategy", choices=[s.value for s in Strategy], required=True)
    p.add_argument("--stop-fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int)
    p.add_argument("--rerank", action="store_true", help="re-rank survivors before every step")
    p.add_argument("--out", required=True)
    _add_pagerank_flags(p)

    p = command("connectivity", cmd_attack_connectivity, "batch removal measured by LCC fraction", attack_sub)
    p.add_argument("--edges", required=True)
    p.add_argument("--strategy", choices=[s.value for s in Strategy], required=True)
    p.add_argument("--batch-fraction", type=float, default=0.1)
    p.add_argument("--max-fraction", type=float, default=0.5)
    p.add_argument("--baseline", action="store_true", help="also attack G(n, m) with the same n and m")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    _add_pagerank_flags(p)

    p = command("evolution", cmd_evolution, "yearly snapshot statistics")
    p.add_argument("--cache", required=True)
    p.add_argument("--cutoffs", required=True, help="comma-separated, strictly increasing")
    p.add_argument("--lwcc", action="store_true")
    p.add_argument("--out", required=True)
    _add_pagerank_flags(p)

    p = command("communities", cmd_communities, "Louvain communities vs top-package neighbourhoods")
    p.add_argument("--edges", required=True)
    p.add_argument("--top", type=int, default=20)
    p.add_argument("--k", default="1,2,3", help=f"comma-separated subset of {ALLOWED_STEPS}")
    p.add_argument("--seed", type=int)
    p.add_argument("--resolution", type=float, default=1.0)
    p.add_argument("--exclude-root", action="store_true", help="leave the package out of its neighbourhood")
    p.add_argument("--out", required=True)
    _add_pagerank_flags(p)

    p = command("stats", cmd_stats, "size, degree and component summary of an edge list")
    p.add_argument("--edges", required=True)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s"
    )
    name = args.command + (f" {args.attack}" if args.command == "attack" else "")
    if getattr(args, "threads", 1) < 1:
        print("depnet: error: --threads must be >= 1", file=sys.stderr)
        return 2
    run = Run(name, args, argv)
    try:
        args.func(run)
    except (DepnetError, ValueError) as exc:
        print(f"depnet {name}: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"depnet {name}: I/O error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
