"""Attack simulations on dependency graphs.

Two experiments:

* cascade: repeatedly take the most important surviving package, fail it
  together with everything that transitively depends on it, and record the
  fraction of the network affected so far;
* connectivity: remove packages in ranked batches without propagation and
  record the size of the largest weakly connected component.

Fractions always divide by the node count of the graph the attack started
on.  Rankings are computed once on that graph; already-removed nodes are
passed over.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .centrality import PageRankConfig, RankedList, Strategy, rank_nodes
from .errors import EmptyInputError, ParameterError
from .generators import GeneratorConfig, gnm_random
from .graph import INDEX_DTYPE, DependencyGraph, induced_subgraph, reverse_bfs, weakly_connected_components


def fraction_count(fraction: float, n: int) -> int:
    """``ceil(fraction * n)``, immune to float noise such as 0.3 * 10."""
    return math.ceil(round(fraction * n, 9))


@dataclass(frozen=True)
class CascadeStep:
    step: int
    target: int
    target_label: str
    removed: np.ndarray  # NodeIds of the attacked graph, target first
    cumulative_affected_fraction: float

    @property
    def removed_count(self) -> int:
        return len(self.removed)


@dataclass
class RemovalTrace:
    strategy: Strategy
    node_count: int
    steps: list[CascadeStep] = field(default_factory=list)

    @property
    def fractions(self) -> list[float]:
        return [s.cumulative_affected_fraction for s in self.steps]

    def removed_sets(self) -> list[set[int]]:
        """Cumulative removed set after each step."""
        out, acc = [], set()
        for s in self.steps:
            acc |= set(s.removed.tolist())
            out.append(set(acc))
        return out


@dataclass(frozen=True)
class ConnectivityPoint:
    removed_count: int
    removed_fraction: float
    lcc_fraction: float


@dataclass
class ConnectivityTrace:
    strategy: Strategy
    node_count: int
    points: list[ConnectivityPoint] = field(default_factory=list)

    @property
    def removed_fractions(self) -> list[float]:
        return [p.removed_fraction for p in self.points]

    @property
    def lcc_fractions(self) -> list[float]:
        return [p.lcc_fraction for p in self.points]

    def lcc_at(self, removed_fraction: float) -> float:
        """LCC fraction at the first grid point reaching ``removed_fraction``."""
        target = fraction_count(removed_fraction, self.node_count)
        for p in self.points:
            if p.removed_count >= target:
                return p.lcc_fraction
        raise KeyError(f"trace stops before {removed_fraction:.3f} removed")


def _top_alive(g: DependencyGraph, alive: np.ndarray, strategy: Strategy, cfg: PageRankConfig | None) -> int:
    ids = np.flatnonzero(alive)
    sub = induced_subgraph(g, alive)
    return int(ids[rank_nodes(sub, strategy, config=cfg).order[0]])


def cascade_attack(
    g: DependencyGraph,
    strategy: Strategy | str,
    stop_fraction: float = 0.1,
    seed: int = 0,
    *,
    ranking: RankedList | None = None,
    rerank: bool = False,
    pagerank_config: PageRankConfig | None = None,
) -> RemovalTrace:
    """Targeted failure with propagation to transitive dependents.

    Each step fails the highest-ranked surviving node and every surviving
    node that can reach it.  Only targets count toward ``stop_fraction``;
    the run ends after ``ceil(stop_fraction * n)`` targets or when nothing
    is left.  ``rerank=True`` recomputes the hub/pagerank order on the
    survivors before every step instead of using the frozen order.
    """
    strategy = Strategy(strategy)
    n = g.node_count
    if n == 0:
        raise EmptyInputError("cascade attack on an empty graph")
    if not 0.0 < stop_fraction <= 1.0:
        raise ParameterError(f"stop_fraction must be in (0, 1], got {stop_fraction}")
    if ranking is None:
        ranking = rank_nodes(g, strategy, seed, pagerank_config)
    dynamic = rerank and strategy is not Strategy.RANDOM

    budget = fraction_count(stop_fraction, n)
    dead = np.zeros(n, dtype=bool)
    trace = RemovalTrace(strategy, n)
    total = 0
    cursor = 0
    order = ranking.order
    while len(trace.steps) < budget and total < n:
        if dynamic:
            target = _top_alive(g, ~dead, strategy, pagerank_config)
        else:
            while dead[order[cursor]]:
                cursor += 1
            target = int(order[cursor])
        dead[target] = True
        victims = reverse_bfs(g, target, dead)
        removed = np.concatenate([np.array([target], dtype=INDEX_DTYPE), victims])
        total += len(removed)
        trace.steps.append(
            CascadeStep(len(trace.steps) + 1, target, g.label(target), removed, total / n)
        )
    return trace


def connectivity_attack(
    g: DependencyGraph,
    strategy: Strategy | str,
    batch_fraction: float = 0.1,
    max_fraction: float = 0.5,
    seed: int = 0,
    *,
    ranking: RankedList | None = None,
    pagerank_config: PageRankConfig | None = None,
) -> ConnectivityTrace:
    """Batch removal without propagation, measuring the largest component.

    Batches hold ``ceil(batch_fraction * n)`` nodes; the last batch is cut
    short so that exactly ``ceil(max_fraction * n)`` nodes are removed.
    """
    strategy = Strategy(strategy)
    n = g.node_count
    if n == 0:
        raise EmptyInputError("connectivity attack on an empty graph")
    if not 0.0 < batch_fraction <= max_fraction <= 1.0:
        raise ParameterError(
            f"need 0 < batch_fraction <= max_fraction <= 1, got {batch_fraction}, {max_fraction}"
        )
    if ranking is None:
        ranking = rank_nodes(g, strategy, seed, pagerank_config)
    batch = fraction_count(batch_fraction, n)
    limit = fraction_count(max_fraction, n)

    alive = np.ones(n, dtype=bool)
    trace = ConnectivityTrace(strategy, n)
    removed = 0
    while removed < limit:
        take = min(batch, limit - removed)
        alive[ranking.order[removed : removed + take]] = False
        removed += take
        if alive.any():
            lcc = weakly_connected_components(induced_subgraph(g, alive), denominator=n).lcc_fraction
        else:
            lcc = 0.0
        trace.points.append(ConnectivityPoint(removed, removed / n, lcc))
    return trace


@dataclass
class BaselineComparison:
    trace: ConnectivityTrace
    baseline: ConnectivityTrace
    baseline_graph: DependencyGraph

    def rows(self) -> list[tuple[float, float, float]]:
        """``(removed_fraction, lcc_fraction, baseline_lcc_fraction)`` per batch."""
        return [
            (p.removed_fraction, p.lcc_fraction, q.lcc_fraction)
            for p, q in zip(self.trace.points, self.baseline.points)
        ]


def compare_to_random_baseline(
    g: DependencyGraph,
    strategy: Strategy | str,
    batch_fraction: float = 0.1,
    max_fraction: float = 0.5,
    seed: int = 0,
    *,
    pagerank_config: PageRankConfig | None = None,
) -> BaselineComparison:
    """Run the connectivity attack on ``g`` and on G(n, m) with the same n, m."""
    trace = connectivity_attack(g, strategy, batch_fraction, max_fraction, seed, pagerank_config=pagerank_config)
    rand = gnm_random(GeneratorConfig(g.node_count, edge_count=g.edge_count, seed=seed))
    baseline = connectivity_attack(rand, strategy, batch_fraction, max_fraction, seed, pagerank_config=pagerank_config)
    return BaselineComparison(trace, baseline, rand)
