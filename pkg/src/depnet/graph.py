"""Compact immutable directed dependency graph.

An edge ``u -> v`` means *u depends on v*.  Both adjacency directions are
stored as CSR arrays (``ptr``/``idx`` pairs) so that dependencies (out-edges)
and dependents (in-edges) are equally cheap to walk.  Nodes are dense
integers; package names live in an optional side table.

Graphs produced by :func:`remove_nodes` remember which node of the very
first graph each surviving node came from, and how many nodes that first
graph had.  Every fraction reported by the attack code divides by that
original count.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import EmptyInputError, GraphBuildError, NodeRangeError

INDEX_DTYPE = np.int64

_EMPTY = np.zeros(0, dtype=INDEX_DTYPE)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=INDEX_DTYPE)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DependencyGraph:
    """Directed graph in dual CSR form.

    ``out_idx[out_ptr[u]:out_ptr[u+1]]`` are the dependencies of ``u`` and
    ``in_idx[in_ptr[v]:in_ptr[v+1]]`` its dependents, both sorted ascending.
    """

    out_ptr: np.ndarray
    out_idx: np.ndarray
    in_ptr: np.ndarray
    in_idx: np.ndarray
    labels: tuple[str, ...] | None = None
    original_ids: np.ndarray = field(default=None)  # type: ignore[assignment]
    original_node_count: int = -1
    self_loops_dropped: int = 0
    duplicates_dropped: int = 0

    def __post_init__(self) -> None:
        n = len(self.out_ptr) - 1
        if self.original_ids is None:
            object.__setattr__(self, "original_ids", _frozen(np.arange(n)))
        if self.original_node_count < 0:
            object.__setattr__(self, "original_node_count", n)
        object.__setattr__(self, "_index", None)

    # ---- size --------------------------------------------------------------

    @property
    def node_count(self) -> int:
        return len(self.out_ptr) - 1

    @property
    def edge_count(self) -> int:
        return len(self.out_idx)

    def __len__(self) -> int:
        return self.node_count

    def __repr__(self) -> str:
        return (
            f"DependencyGraph(n={self.node_count}, m={self.edge_count}, "
            f"original_n={self.original_node_count})"
        )

    # ---- per-node queries ----------------------------------------------------

    def check_node(self, v: int) -> int:
        """Return ``v`` as a plain int, raising NodeRangeError if invalid."""
        try:
            iv = int(v)
        except (TypeError, ValueError):
            raise NodeRangeError(f"not a NodeId: {v!r}") from None
        if iv != v or not 0 <= iv < self.node_count:
            raise NodeRangeError(f"NodeId {v!r} outside [0, {self.node_count})")
        return iv

    def successors(self, v: int) -> np.ndarray:
        """Dependencies of ``v`` (targets of its out-edges)."""
        v = self.check_node(v)
        return self.out_idx[self.out_ptr[v] : self.out_ptr[v + 1]]

    def predecessors(self, v: int) -> np.ndarray:
        """Direct dependents of ``v`` (sources of its in-edges)."""
        v = self.check_node(v)
        return self.in_idx[self.in_ptr[v] : self.in_ptr[v + 1]]

    def out_degree(self) -> np.ndarray:
        return np.diff(self.out_ptr)

    def in_degree(self) -> np.ndarray:
        return np.diff(self.in_ptr)

    def label(self, v: int) -> str:
        v = self.check_node(v)
        return self.labels[v] if self.labels is not None else str(v)

    def index_of(self, label: str) -> int:
        """NodeId carrying ``label``; KeyError when absent."""
        if self.labels is None:
            return self.check_node(int(label))
        if self._index is None:
            object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.labels)})
        return self._index[label]  # type: ignore[index]

    def edges(self) -> np.ndarray:
        """All edges as an ``(m, 2)`` array sorted by (source, target)."""
        src = np.repeat(np.arange(self.node_count, dtype=INDEX_DTYPE), self.out_degree())
        return np.column_stack([src, self.out_idx])

    def adjacency_matrix(self) -> csr_matrix:
        """Sparse ``A`` with ``A[u, v] = 1`` for each edge ``u -> v``."""
        n = self.node_count
        data = np.ones(self.edge_count, dtype=np.float64)
        return csr_matrix((data, self.out_idx, self.out_ptr), shape=(n, n))


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def _csr(n: int, major: np.ndarray, minor: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.lexsort((minor, major))
    ptr = np.zeros(n + 1, dtype=INDEX_DTYPE)
    np.cumsum(np.bincount(major, minlength=n), out=ptr[1:])
    return ptr, minor[order]


def from_arrays(
    n: int,
    src: np.ndarray,
    dst: np.ndarray,
    labels: Sequence[str] | None = None,
    original_ids: np.ndarray | None = None,
    original_node_count: int = -1,
) -> DependencyGraph:
    """Build a graph from parallel endpoint arrays of NodeIds in ``[0, n)``.

    Self-loops and duplicate edges are dropped and counted.
    """
    src = np.asarray(src, dtype=INDEX_DTYPE)
    dst = np.asarray(dst, dtype=INDEX_DTYPE)
    loops = src == dst
    n_loops = int(loops.sum())
    if n_loops:
        src, dst = src[~loops], dst[~loops]
    keys = np.unique(src * max(n, 1) + dst)
    n_dups = len(src) - len(keys)
    src, dst = keys // max(n, 1), keys % max(n, 1)
    # keys are sorted, so src-major order is already in place
    out_ptr = np.zeros(n + 1, dtype=INDEX_DTYPE)
    np.cumsum(np.bincount(src, minlength=n), out=out_ptr[1:])
    in_ptr, in_idx = _csr(n, dst, src)
    return DependencyGraph(
        out_ptr=_frozen(out_ptr),
        out_idx=_frozen(dst),
        in_ptr=_frozen(in_ptr),
        in_idx=_frozen(in_idx),
        labels=tuple(labels) if labels is not None else None,
        original_ids=None if original_ids is None else _frozen(original_ids),
        original_node_count=original_node_count,
        self_loops_dropped=n_loops,
        duplicates_dropped=n_dups,
    )


def _is_int(x: object) -> bool:
    return isinstance(x, (int, np.integer)) and not isinstance(x, bool)


def build_graph(
    edges: Iterable[tuple[Hashable, Hashable]],
    labels: Iterable[str] | None = None,
    *,
    num_nodes: int | None = None,
    sort_labels: bool = True,
) -> DependencyGraph:
    """Build a :class:`DependencyGraph` from an edge list.

    Endpoints are either integer NodeIds or package labels.  With an
    explicit ``labels`` collection every endpoint must be one of those
    labels; nodes are numbered in sorted label order unless
    ``sort_labels=False`` (then the given order is kept, which is how the
    sidecar label file is read back).  String endpoints without ``labels``
    imply the label set.  Integer endpoints without labels are NodeIds
    directly, with ``num_nodes`` defaulting to ``max id + 1``.

    Raises:
        GraphBuildError: duplicate label, or endpoints that do not resolve.
    """
    if isinstance(edges, np.ndarray) and edges.dtype.kind in "iu" and labels is None:
        arr = edges.reshape(-1, 2).astype(INDEX_DTYPE)
        return _build_from_ids(arr[:, 0], arr[:, 1], num_nodes)
    edge_list = list(edges)

    if labels is None:
        if all(_is_int(u) and _is_int(v) for u, v in edge_list):
            src = np.fromiter((u for u, _ in edge_list), INDEX_DTYPE, len(edge_list))
            dst = np.fromiter((v for _, v in edge_list), INDEX_DTYPE, len(edge_list))
            return _build_from_ids(src, dst, num_nodes)
        names = {str(x) for e in edge_list for x in e}
        label_list = sorted(names)
    else:
        label_list = list(labels)
        seen: set[str] = set()
        for s in label_list:
            if s in seen:
                raise GraphBuildError(f"duplicate label: {s!r}")
            seen.add(s)
        if sort_labels:
            label_list.sort()

    index = {s: i for i, s in enumerate(label_list)}
    unresolved = sorted({str(x) for e in edge_list for x in e if str(x) not in index})
    if unresolved:
        shown = ", ".join(repr(s) for s in unresolved[:20])
        more = f" (+{len(unresolved) - 20} more)" if len(unresolved) > 20 else ""
        raise GraphBuildError(f"unresolved endpoint labels: {shown}{more}")
    src = np.fromiter((index[str(u)] for u, _ in edge_list), INDEX_DTYPE, len(edge_list))
    dst = np.fromiter((index[str(v)] for _, v in edge_list), INDEX_DTYPE, len(edge_list))
    return from_arrays(len(label_list), src, dst, labels=label_list)


def _build_from_ids(src: np.ndarray, dst: np.ndarray, num_nodes: int | None) -> DependencyGraph:
    top = int(max(src.max(initial=-1), dst.max(initial=-1))) + 1
    n = top if num_nodes is None else int(num_nodes)
    if n < top or (len(src) and min(src.min(), dst.min()) < 0):
        raise GraphBuildError(f"edge endpoints outside [0, {n})")
    return from_arrays(n, src, dst)


# ---------------------------------------------------------------------------
# traversal
# ---------------------------------------------------------------------------


def gather_neighbors(ptr: np.ndarray, idx: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    """Concatenate the CSR rows of ``nodes`` without a Python loop."""
    starts = ptr[nodes]
    counts = ptr[nodes + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return _EMPTY
    # position of each gathered entry = its row start + offset within the row
    row_first = np.cumsum(counts) - counts
    offsets = np.arange(total, dtype=INDEX_DTYPE) - np.repeat(row_first - starts, counts)
    return idx[offsets]


def reverse_bfs(
    g: DependencyGraph, v: int, blocked: np.ndarray, max_depth: int | None = None
) -> np.ndarray:
    """Nodes reaching ``v`` along in-edges while avoiding ``blocked`` nodes.

    ``blocked`` is updated in place: every node returned is marked.  The
    root is only returned if it is reached again through a cycle and is not
    itself blocked.  Work is proportional to the edges scanned, so repeated
    calls sharing one ``blocked`` mask cost O(n + m) in total.
    """
    frontier = np.array([v], dtype=INDEX_DTYPE)
    found = []
    depth = 0
    while frontier.size and (max_depth is None or depth < max_depth):
        nb = gather_neighbors(g.in_ptr, g.in_idx, frontier)
        nb = nb[~blocked[nb]]
        if nb.size == 0:
            break
        nb = np.unique(nb)
        blocked[nb] = True
        found.append(nb)
        frontier = nb
        depth += 1
    if not found:
        return _EMPTY
    return np.sort(np.concatenate(found))


def dependents(g: DependencyGraph, v: int) -> set[int]:
    """Direct dependents (in-neighbours) of ``v``."""
    return set(g.predecessors(v).tolist())


def reverse_reachable_set(g: DependencyGraph, v: int) -> set[int]:
    """All nodes with a directed path of length >= 1 to ``v``.

    ``v`` itself is included only when it lies on a cycle.
    """
    return set(reverse_reachable_array(g, v).tolist())


def reverse_reachable_array(g: DependencyGraph, v: int) -> np.ndarray:
    v = g.check_node(v)
    blocked = np.zeros(g.node_count, dtype=bool)
    return reverse_bfs(g, v, blocked)


# ---------------------------------------------------------------------------
# components and subgraphs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComponentLabeling:
    """Weak components; ids are ordered by each component's smallest NodeId."""

    component_of: np.ndarray
    component_sizes: np.ndarray
    lcc_fraction: float

    @property
    def count(self) -> int:
        return len(self.component_sizes)

    @property
    def largest(self) -> int:
        """Id of the largest component (lowest id among equal sizes)."""
        return int(np.argmax(self.component_sizes))


def weakly_connected_components(
    g: DependencyGraph, denominator: int | None = None
) -> ComponentLabeling:
    """Components of the undirected projection of ``g``.

    ``lcc_fraction`` divides the largest component by ``denominator``, which
    defaults to the current node count.
    """
    n = g.node_count
    denom = n if denominator is None else denominator
    if n == 0:
        return ComponentLabeling(_EMPTY, _EMPTY, 0.0)
    _, raw = connected_components(g.adjacency_matrix(), directed=True, connection="weak")
    # relabel so that component ids follow the first node of each component
    _, first = np.unique(raw, return_index=True)
    rank = np.empty(len(first), dtype=INDEX_DTYPE)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    comp = rank[raw].astype(INDEX_DTYPE)
    sizes = np.bincount(comp).astype(INDEX_DTYPE)
    frac = float(sizes.max()) / denom if denom else 0.0
    return ComponentLabeling(comp, sizes, frac)


def _victim_mask(g: DependencyGraph, victims: Iterable[int] | np.ndarray) -> np.ndarray:
    mask = np.zeros(g.node_count, dtype=bool)
    arr = np.asarray(list(victims) if not isinstance(victims, np.ndarray) else victims)
    if arr.size:
        if arr.dtype.kind not in "iu":
            raise NodeRangeError(f"victims must be integer NodeIds, got {arr.dtype}")
        if arr.min() < 0 or arr.max() >= g.node_count:
            bad = arr[(arr < 0) | (arr >= g.node_count)]
            raise NodeRangeError(f"NodeIds outside [0, {g.node_count}): {bad[:10].tolist()}")
        mask[arr] = True
    return mask


def induced_subgraph(g: DependencyGraph, keep: np.ndarray) -> DependencyGraph:
    """Subgraph on the nodes where the boolean mask ``keep`` is set."""
    keep = np.asarray(keep, dtype=bool)
    new_id = np.cumsum(keep, dtype=INDEX_DTYPE) - 1
    e = g.edges()
    live = keep[e[:, 0]] & keep[e[:, 1]]
    src = new_id[e[live, 0]]
    dst = new_id[e[live, 1]]
    labels = None
    if g.labels is not None:
        labels = [s for s, k in zip(g.labels, keep) if k]
    sub = from_arrays(
        int(keep.sum()),
        src,
        dst,
        labels=labels,
        original_ids=g.original_ids[keep],
        original_node_count=g.original_node_count,
    )
    return sub


def remove_nodes(g: DependencyGraph, victims: Iterable[int]) -> DependencyGraph:
    """Induced subgraph without ``victims``.

    Surviving nodes are renumbered densely in their previous order;
    ``original_ids`` and ``original_node_count`` carry through.
    """
    mask = _victim_mask(g, victims)
    if not mask.any():
        return g
    return induced_subgraph(g, ~mask)


def largest_weakly_connected_subgraph(g: DependencyGraph) -> DependencyGraph:
    """Induced subgraph of the largest weak component.

    Ties go to the component holding the smallest original NodeId.
    """
    if g.node_count == 0:
        raise EmptyInputError("largest component of an empty graph")
    comps = weakly_connected_components(g)
    best = comps.component_sizes.max()
    candidates = np.flatnonzero(comps.component_sizes == best)
    if len(candidates) == 1:
        pick = candidates[0]
    else:
        lowest = [g.original_ids[comps.component_of == c].min() for c in candidates]
        pick = candidates[int(np.argmin(lowest))]
    keep = comps.component_of == pick
    if keep.all():
        return g
    return induced_subgraph(g, keep)


# ---------------------------------------------------------------------------
# edge-list text format
# ---------------------------------------------------------------------------


def labels_path_for(edges_path: str | os.PathLike) -> str:
    """Default sidecar location: ``<edges>.labels``."""
    return os.fspath(edges_path) + ".labels"


def write_edge_list(
    g: DependencyGraph,
    path: str | os.PathLike,
    labels_path: str | os.PathLike | None = None,
) -> None:
    """Write ``source<TAB>target`` lines plus the label sidecar.

    The sidecar lists one label per line in NodeId order, so isolated nodes
    survive the round trip.
    """
    labels = g.labels if g.labels is not None else tuple(str(i) for i in range(g.node_count))
    for s in labels:
        if "\t" in s or "\n" in s or "\r" in s:
            raise GraphBuildError(f"label not representable in edge-list format: {s!r}")
    e = g.edges()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# nodes={g.node_count} edges={g.edge_count}\n")
        fh.writelines(f"{labels[u]}\t{labels[v]}\n" for u, v in e.tolist())
    with open(labels_path or labels_path_for(path), "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(s + "\n" for s in labels)


def read_labels(path: str | os.PathLike) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh if line.rstrip("\n")]


def read_edge_list(
    path: str | os.PathLike, labels_path: str | os.PathLike | None = None
) -> DependencyGraph:
    """Read an edge-list file, using the label sidecar when one exists."""
    edges: list[tuple[str, str]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise GraphBuildError(f"{path}:{lineno}: expected 'source<TAB>target'")
            edges.append((parts[0], parts[1]))
    side = labels_path or labels_path_for(path)
    if labels_path is not None or os.path.exists(side):
        return build_graph(edges, read_labels(side), sort_labels=False)
    return build_graph(edges, labels=sorted({x for e in edges for x in e}))
