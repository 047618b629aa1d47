"""Yearly snapshot statistics: dependency counts and reliance on top packages."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime
from typing import Sequence

import numpy as np

from .centrality import PageRankConfig, Strategy, rank_nodes
from .errors import EmptyInputError, ParameterError
from .graph import DependencyGraph, largest_weakly_connected_subgraph, reverse_reachable_array
from .registry import PackageRecord, snapshot_edges

logger = logging.getLogger(__name__)

TOP_OUT_DEGREE = 50
TOP_DEPENDENCE = 100


@dataclass(frozen=True)
class EvolutionRow:
    year: int
    cutoff: datetime
    node_count: int
    edge_count: int
    avg_out_degree_all: float | None
    avg_out_degree_top50: float | None
    avg_dependence_top100: float | None


def avg_out_degree(g: DependencyGraph) -> float:
    if g.node_count == 0:
        raise EmptyInputError("average out-degree of an empty graph")
    return g.edge_count / g.node_count


def _check_k(g: DependencyGraph, k: int) -> None:
    if not 1 <= k <= g.node_count:
        raise ParameterError(f"k must be in [1, {g.node_count}], got {k}")


def top_pagerank_nodes(g: DependencyGraph, k: int, config: PageRankConfig | None = None) -> np.ndarray:
    _check_k(g, k)
    return rank_nodes(g, Strategy.PAGERANK, config=config).order[:k]


def avg_out_degree_top_k(g: DependencyGraph, k: int, config: PageRankConfig | None = None) -> float:
    """Mean number of dependencies among the ``k`` highest-PageRank nodes."""
    top = top_pagerank_nodes(g, k, config)
    return float(g.out_degree()[top].mean())


def dependence_on(g: DependencyGraph, v: int) -> float:
    """Fraction of all nodes that transitively depend on ``v``."""
    return len(reverse_reachable_array(g, v)) / g.node_count


def avg_dependence_on_top_k(
    g: DependencyGraph,
    k: int,
    config: PageRankConfig | None = None,
    threads: int = 1,
) -> float:
    """Mean over the top-``k`` PageRank nodes of their transitive-dependent share.

    Each top node gets its own traversal; the average is taken in rank
    order whatever the thread count.
    """
    top = top_pagerank_nodes(g, k, config).tolist()
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            shares = list(pool.map(lambda v: dependence_on(g, v), top))
    else:
        shares = [dependence_on(g, v) for v in top]
    return float(np.mean(shares))


def snapshot_row(
    g: DependencyGraph,
    cutoff: datetime,
    config: PageRankConfig | None = None,
    threads: int = 1,
    top_out: int = TOP_OUT_DEGREE,
    top_dep: int = TOP_DEPENDENCE,
) -> EvolutionRow:
    n = g.node_count
    if n == 0:
        return EvolutionRow(cutoff.year, cutoff, 0, 0, None, None, None)
    # early snapshots may hold fewer packages than k
    return EvolutionRow(
        cutoff.year,
        cutoff,
        n,
        g.edge_count,
        avg_out_degree(g),
        avg_out_degree_top_k(g, min(top_out, n), config),
        avg_dependence_on_top_k(g, min(top_dep, n), config, threads),
    )


@dataclass
class EvolutionReport:
    rows: list[EvolutionRow]
    empty_snapshots: int = 0


def evolution_report(
    records: Sequence[PackageRecord],
    cutoffs: Sequence[datetime],
    *,
    lwcc: bool = False,
    config: PageRankConfig | None = None,
    threads: int = 1,
) -> EvolutionReport:
    """One :class:`EvolutionRow` per cutoff.

    Snapshots are analysed whole unless ``lwcc`` restricts each to its
    largest weakly connected component.  An empty snapshot yields a row of
    ``None`` statistics and is counted in ``empty_snapshots``.
    """
    if any(b <= a for a, b in zip(cutoffs, cutoffs[1:])):
        raise ParameterError("cutoffs must be strictly increasing")

    def one(cutoff: datetime) -> EvolutionRow:
        g = snapshot_edges(records, cutoff).to_graph()
        if lwcc and g.node_count:
            g = largest_weakly_connected_subgraph(g)
        return snapshot_row(g, cutoff, config, threads=1)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(one, cutoffs))
    else:
        rows = [one(c) for c in cutoffs]
    empty = sum(r.node_count == 0 for r in rows)
    if empty:
        logger.warning("%d snapshot(s) contain no packages", empty)
    return EvolutionReport(rows, empty)
