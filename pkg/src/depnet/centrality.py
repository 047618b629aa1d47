"""Node rankings used as attack orders: PageRank, in-degree, and random."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.sparse import csr_matrix

from .errors import EmptyInputError, ParameterError
from .graph import INDEX_DTYPE, DependencyGraph


class Strategy(str, Enum):
    RANDOM = "random"
    HUB = "hub"
    PAGERANK = "pagerank"


@dataclass(frozen=True)
class PageRankConfig:
    damping: float = 0.85
    tolerance: float = 1e-10
    max_iterations: int = 200

    def __post_init__(self) -> None:
        if not 0.0 < self.damping < 1.0:
            raise ParameterError(f"damping must be in (0, 1), got {self.damping}")
        if not self.tolerance > 0:
            raise ParameterError(f"tolerance must be > 0, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ParameterError(f"max_iterations must be >= 1, got {self.max_iterations}")


@dataclass(frozen=True)
class PageRankResult:
    scores: np.ndarray
    iterations: int
    converged: bool
    residual: float


@dataclass(frozen=True)
class RankedList:
    """Permutation of NodeIds, most important first."""

    strategy: Strategy
    order: np.ndarray
    scores: np.ndarray | None = None


def _transition(g: DependencyGraph) -> csr_matrix:
    """``P`` with ``P[v, u] = 1/outdeg(u)`` for each edge ``u -> v``.

    Multiplying a rank vector by ``P`` moves each node's rank to its
    dependencies, so packages that many others depend on collect rank.
    """
    n = g.node_count
    outdeg = g.out_degree().astype(np.float64)
    with np.errstate(divide="ignore"):
        inv = np.where(outdeg > 0, 1.0 / outdeg, 0.0)
    # row v of P lists v's dependents, which is exactly the in-adjacency CSR
    return csr_matrix((inv[g.in_idx], g.in_idx, g.in_ptr), shape=(n, n))


def pagerank(g: DependencyGraph, config: PageRankConfig | None = None) -> PageRankResult:
    """Power-iteration PageRank with rank flowing along out-edges.

    Dangling nodes (no dependencies) spread their rank uniformly.  Iteration
    stops once the L1 change drops below ``config.tolerance``; if
    ``max_iterations`` is hit first, the last iterate is returned with
    ``converged=False``.
    """
    cfg = config or PageRankConfig()
    n = g.node_count
    if n == 0:
        raise EmptyInputError("pagerank of an empty graph")
    if g.edge_count == 0:
        return PageRankResult(np.full(n, 1.0 / n), 0, True, 0.0)

    P = _transition(g)
    dangling = g.out_degree() == 0
    d = cfg.damping
    x = np.full(n, 1.0 / n)
    residual = np.inf
    for it in range(1, cfg.max_iterations + 1):
        leaked = x[dangling].sum()
        new = d * (P @ x) + (d * leaked + (1.0 - d)) / n
        # the update preserves total mass exactly in theory; pin it to 1
        new /= new.sum()
        residual = float(np.abs(new - x).sum())
        x = new
        if residual < cfg.tolerance:
            return PageRankResult(x, it, True, residual)
    return PageRankResult(x, cfg.max_iterations, False, residual)


def descending_order(scores: np.ndarray) -> np.ndarray:
    """Indices by score descending, ties by ascending NodeId."""
    ids = np.arange(len(scores), dtype=INDEX_DTYPE)
    return np.lexsort((ids, -scores)).astype(INDEX_DTYPE)


def rank_nodes(
    g: DependencyGraph,
    strategy: Strategy | str,
    seed: int = 0,
    config: PageRankConfig | None = None,
) -> RankedList:
    strategy = Strategy(strategy)
    n = g.node_count
    if strategy is Strategy.HUB:
        scores = g.in_degree().astype(np.float64)
        return RankedList(strategy, descending_order(scores), scores)
    if strategy is Strategy.PAGERANK:
        if n == 0:
            return RankedList(strategy, np.zeros(0, dtype=INDEX_DTYPE), np.zeros(0))
        scores = pagerank(g, config).scores
        return RankedList(strategy, descending_order(scores), scores)
    rng = np.random.default_rng(np.random.PCG64(seed))
    return RankedList(strategy, rng.permutation(n).astype(INDEX_DTYPE))
