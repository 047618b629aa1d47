"""Louvain communities and their overlap with dependent neighbourhoods.

Louvain runs on the undirected projection of the dependency graph, where a
pair of packages depending on each other becomes one edge of weight 2 and
every other dependency an edge of weight 1.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .centrality import PageRankConfig, Strategy, rank_nodes
from .errors import EmptyInputError, ParameterError
from .graph import INDEX_DTYPE, DependencyGraph, reverse_bfs

# A move must beat staying put by more than this (in edge-weight units).
_MIN_GAIN = 1e-10

ALLOWED_STEPS = (1, 2, 3)


@dataclass(frozen=True, eq=False)
class UndirectedGraph:
    """Weighted simple undirected graph; each edge stored once with ``u < v``."""

    node_count: int
    u: np.ndarray
    v: np.ndarray
    weight: np.ndarray

    @property
    def edge_count(self) -> int:
        return len(self.u)

    @property
    def total_weight(self) -> float:
        return float(self.weight.sum())

    def degrees(self) -> np.ndarray:
        """Weighted degree of every node."""
        k = np.bincount(self.u, self.weight, minlength=self.node_count)
        return k + np.bincount(self.v, self.weight, minlength=self.node_count)

    def neighbors(self, i: int) -> dict[int, float]:
        out = {int(j): float(w) for j, w in zip(self.v[self.u == i], self.weight[self.u == i])}
        out.update({int(j): float(w) for j, w in zip(self.u[self.v == i], self.weight[self.v == i])})
        return out


def to_undirected(g: DependencyGraph) -> UndirectedGraph:
    """Undirected projection; reciprocal dependencies merge into weight 2."""
    e = g.edges()
    n = g.node_count
    lo = np.minimum(e[:, 0], e[:, 1])
    hi = np.maximum(e[:, 0], e[:, 1])
    keys, counts = np.unique(lo * max(n, 1) + hi, return_counts=True)
    return UndirectedGraph(
        n,
        (keys // max(n, 1)).astype(INDEX_DTYPE),
        (keys % max(n, 1)).astype(INDEX_DTYPE),
        counts.astype(np.float64),
    )


@dataclass(frozen=True)
class CommunityPartition:
    community_of: np.ndarray
    modularity: float
    levels: int = 0
    resolution: float = 1.0

    @property
    def community_count(self) -> int:
        return int(self.community_of.max()) + 1 if len(self.community_of) else 0

    def members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.community_of == c)


def _relabel(labels: np.ndarray) -> np.ndarray:
    """Contiguous ids ordered by the first node of each community."""
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=INDEX_DTYPE)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[inverse.reshape(-1)]


def modularity(ug: UndirectedGraph, community_of: np.ndarray, resolution: float = 1.0) -> float:
    """Weighted Newman modularity of a flat partition, computed from scratch.

    A graph without edge weight has modularity 0 by convention.
    """
    m = ug.total_weight
    if m == 0:
        return 0.0
    comm = np.asarray(community_of)
    same = comm[ug.u] == comm[ug.v]
    internal = np.bincount(comm[ug.u[same]], ug.weight[same], minlength=comm.max() + 1)
    tot = np.bincount(comm, ug.degrees(), minlength=comm.max() + 1)
    return float(internal.sum() / m - resolution * np.sum((tot / (2 * m)) ** 2))


class _Level:
    """Aggregated graph of one Louvain level."""

    def __init__(self, n: int, u: np.ndarray, v: np.ndarray, w: np.ndarray, loops: np.ndarray, k: np.ndarray):
        self.n = n
        self.u, self.v, self.w = u, v, w
        self.loops = loops
        self.k = k

    def adjacency(self) -> list[list[tuple[int, float]]]:
        adj: list[list[tuple[int, float]]] = [[] for _ in range(self.n)]
        for a, b, w in zip(self.u.tolist(), self.v.tolist(), self.w.tolist()):
            adj[a].append((b, w))
            adj[b].append((a, w))
        return adj

    def aggregate(self, comm: np.ndarray) -> "_Level":
        c = int(comm.max()) + 1
        cu, cv = comm[self.u], comm[self.v]
        inside = cu == cv
        loops = np.bincount(comm, self.loops, minlength=c) + np.bincount(cu[inside], self.w[inside], minlength=c)
        lo = np.minimum(cu[~inside], cv[~inside])
        hi = np.maximum(cu[~inside], cv[~inside])
        keys, inv = np.unique(lo * c + hi, return_inverse=True)
        w = np.bincount(inv.reshape(-1), self.w[~inside], minlength=len(keys))
        k = np.bincount(comm, self.k, minlength=c)
        return _Level(c, keys // c, keys % c, w, loops, k)


def _move_nodes(level: _Level, m: float, gamma: float, rng: np.random.Generator) -> tuple[np.ndarray, float, int]:
    """Local moving phase: returns (community per node, modularity gain, moves)."""
    n = level.n
    adj = level.adjacency()
    k = level.k.tolist()
    comm = list(range(n))
    tot = list(k)
    order = rng.permutation(n).tolist()
    scale = gamma / (2.0 * m)
    gained = 0.0
    moves = 0
    while True:
        moved = 0
        for i in order:
            nbrs = adj[i]
            if not nbrs:
                continue
            ci = comm[i]
            ki = k[i]
            links: dict[int, float] = {}
            for j, w in nbrs:
                cj = comm[j]
                links[cj] = links.get(cj, 0.0) + w
            tot[ci] -= ki
            stay = links.get(ci, 0.0) - scale * tot[ci] * ki
            best, best_gain = ci, stay
            for c in sorted(links):
                gain = links[c] - scale * tot[c] * ki
                if gain > best_gain + _MIN_GAIN:
                    best, best_gain = c, gain
            tot[best] += ki
            if best != ci:
                comm[i] = best
                gained += (best_gain - stay) / m
                moved += 1
        moves += moved
        if not moved:
            break
    return _relabel(np.asarray(comm, dtype=INDEX_DTYPE)), gained, moves


def louvain(ug: UndirectedGraph, resolution: float = 1.0, seed: int = 0) -> CommunityPartition:
    """Two-phase Louvain modularity maximisation.

    Local moving visits nodes in a seeded random order and moves a node to
    the neighbouring community with the largest strictly positive gain
    (ties to the lowest community id); the communities are then collapsed
    into nodes and the process repeats until no node moves.
    """
    n = ug.node_count
    if n == 0:
        raise EmptyInputError("louvain on an empty graph")
    if resolution <= 0:
        raise ParameterError(f"resolution must be > 0, got {resolution}")
    m = ug.total_weight
    if m == 0:
        return CommunityPartition(np.arange(n, dtype=INDEX_DTYPE), 0.0, 0, resolution)

    rng = np.random.default_rng(np.random.PCG64(seed))
    k = ug.degrees()
    level = _Level(n, ug.u, ug.v, ug.weight, np.zeros(n), k)
    q = -resolution * float(np.sum((k / (2 * m)) ** 2))
    flat = np.arange(n, dtype=INDEX_DTYPE)
    levels = 0
    while True:
        comm, gained, moves = _move_nodes(level, m, resolution, rng)
        if not moves:
            break
        q += gained
        flat = comm[flat]
        levels += 1
        level = level.aggregate(comm)
    return CommunityPartition(_relabel(flat), q, levels, resolution)


# ---------------------------------------------------------------------------
# neighbourhoods and overlap
# ---------------------------------------------------------------------------


def k_step_neighborhood(g: DependencyGraph, v: int, k: int, include_root: bool = True) -> set[int]:
    """``v`` plus every node within ``k`` hops along in-edges (its dependents)."""
    v = g.check_node(v)
    if k not in ALLOWED_STEPS:
        raise ParameterError(f"k must be one of {ALLOWED_STEPS}, got {k}")
    blocked = np.zeros(g.node_count, dtype=bool)
    blocked[v] = True
    found = set(reverse_bfs(g, v, blocked, max_depth=k).tolist())
    if include_root:
        found.add(v)
    return found


@dataclass(frozen=True)
class IntersectionReport:
    package: str
    node: int
    k: int
    community_size: int
    neighborhood_size: int
    intersection_size: int
    frac_of_community: float
    frac_of_neighborhood: float
    dependencies: int


def intersection_report(
    g: DependencyGraph,
    partition: CommunityPartition,
    v: int,
    k: int,
    include_root: bool = True,
) -> IntersectionReport:
    """Overlap between ``v``'s community and its ``k``-step dependents."""
    v = g.check_node(v)
    if len(partition.community_of) != g.node_count:
        raise ParameterError("partition does not cover the graph")
    community = np.flatnonzero(partition.community_of == partition.community_of[v])
    hood = k_step_neighborhood(g, v, k, include_root)
    inter = len(hood.intersection(community.tolist()))
    return IntersectionReport(
        package=g.label(v),
        node=v,
        k=k,
        community_size=len(community),
        neighborhood_size=len(hood),
        intersection_size=inter,
        frac_of_community=inter / len(community),
        frac_of_neighborhood=inter / len(hood) if hood else 0.0,
        dependencies=int(g.out_ptr[v + 1] - g.out_ptr[v]),
    )


def top_package_study(
    g: DependencyGraph,
    top_n: int = 20,
    ks: Iterable[int] = ALLOWED_STEPS,
    seed: int = 0,
    *,
    resolution: float = 1.0,
    partition: CommunityPartition | None = None,
    include_root: bool = True,
    pagerank_config: PageRankConfig | None = None,
    threads: int = 1,
) -> list[IntersectionReport]:
    """Reports for each of the ``top_n`` PageRank packages at each ``k``.

    One Louvain partition is shared by all reports; pass ``partition`` to
    reuse an existing one.  Output is ordered by rank, then ``k``.
    """
    ks = sorted(set(ks))
    if not 1 <= top_n <= g.node_count:
        raise ParameterError(f"top_n must be in [1, {g.node_count}], got {top_n}")
    bad = [k for k in ks if k not in ALLOWED_STEPS]
    if bad or not ks:
        raise ParameterError(f"ks must be a non-empty subset of {ALLOWED_STEPS}, got {ks}")
    if partition is None:
        partition = louvain(to_undirected(g), resolution, seed)
    top = rank_nodes(g, Strategy.PAGERANK, config=pagerank_config).order[:top_n].tolist()
    jobs = [(v, k) for v in top for k in ks]

    def one(job: tuple[int, int]) -> IntersectionReport:
        return intersection_report(g, partition, job[0], job[1], include_root)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(one, jobs))
    return [one(j) for j in jobs]
