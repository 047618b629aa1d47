"""Seeded synthetic dependency graphs.

All randomness comes from ``numpy.random.Generator`` backed by PCG64
(``numpy.random.default_rng(seed)``), so a fixed seed reproduces a graph
exactly within this implementation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .graph import INDEX_DTYPE, DependencyGraph, from_arrays


@dataclass(frozen=True)
class GeneratorConfig:
    node_count: int
    edge_count: int = 0
    edges_per_node: int = 1
    seed: int = 0


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.PCG64(seed))


def gnm_random(config: GeneratorConfig) -> DependencyGraph:
    """Uniform G(n, m): ``m`` distinct non-loop directed edges.

    Edges are drawn without replacement from the ``n(n-1)`` ordered pairs,
    each pair encoded as one integer so that sampling stays cheap at
    registry scale.
    """
    n, m = config.node_count, config.edge_count
    if n < 1:
        raise ParameterError(f"node_count must be >= 1, got {n}")
    slots = n * (n - 1)
    if not 0 <= m <= slots:
        raise ParameterError(f"edge_count must be in [0, {slots}] for n={n}, got {m}")
    rng = _rng(config.seed)
    codes = rng.choice(slots, size=m, replace=False) if m else np.zeros(0, dtype=INDEX_DTYPE)
    codes = np.asarray(codes, dtype=INDEX_DTYPE)
    src = codes // max(n - 1, 1)
    rest = codes % max(n - 1, 1)
    # skip the diagonal: targets at or past the source shift up by one
    dst = rest + (rest >= src)
    return from_arrays(n, src, dst)


def preferential_attachment(config: GeneratorConfig) -> DependencyGraph:
    """Growing graph whose in-degree distribution is heavy-tailed.

    The first ``edges_per_node`` nodes form an edgeless seed.  Every later
    node links to ``edges_per_node`` distinct earlier nodes, each chosen with
    probability proportional to its in-degree + 1.  A duplicate draw is
    redrawn, so the edge count is exactly
    ``(node_count - edges_per_node) * edges_per_node``.
    """
    n, k = config.node_count, config.edges_per_node
    if k < 1:
        raise ParameterError(f"edges_per_node must be >= 1, got {k}")
    if n <= k:
        raise ParameterError(f"node_count must exceed edges_per_node ({n} <= {k})")
    rng = _rng(config.seed)

    # Urn with one ball per node plus one per in-edge received; a uniform
    # draw from the urn picks targets in proportion to in-degree + 1.
    urn = np.empty(n + (n - k) * k, dtype=INDEX_DTYPE)
    urn[:k] = np.arange(k)
    filled = k
    src = np.empty((n - k) * k, dtype=INDEX_DTYPE)
    dst = np.empty_like(src)
    pos = 0
    for new in range(k, n):
        picks = urn[rng.integers(0, filled, size=k)]
        if len(set(picks.tolist())) < k:
            chosen: list[int] = []
            for p in picks.tolist():
                while p in chosen:
                    p = int(urn[rng.integers(0, filled)])
                chosen.append(p)
            picks = np.asarray(chosen, dtype=INDEX_DTYPE)
        src[pos : pos + k] = new
        dst[pos : pos + k] = picks
        pos += k
        urn[filled : filled + k] = picks
        urn[filled + k] = new
        filled += k + 1
    return from_arrays(n, src, dst)
