"""Undirected simple graphs as immutable CSR adjacency.

Edge-list text format: one `u v` pair per line, `#` starts a comment,
blank lines ignored. Node ids may be arbitrary integers; they are
remapped to contiguous 0..n-1 (ascending by original id) and the original
ids ride along as `labels`. Self-loops are dropped with a warning,
parallel duplicates collapse.

Graphs have value semantics: every mutator returns a new Graph and the
underlying arrays are marked read-only, so concurrent readers never need
locks.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import _kernels
from .errors import (
    ConnectivityError,
    EmptyGraphError,
    InvalidEdgeError,
    ParseError,
)

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class Graph:
    """CSR adjacency: indices[indptr[v]:indptr[v+1]] are v's sorted neighbors."""

    indptr: np.ndarray
    indices: np.ndarray
    labels: np.ndarray | None = None    # original node ids, metadata only

    def __post_init__(self):
        self.indptr = np.ascontiguousarray(self.indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(self.indices, dtype=np.int64)
        self.indptr.flags.writeable = False
        self.indices.flags.writeable = False
        if self.labels is not None:
            self.labels = np.ascontiguousarray(self.labels, dtype=np.int64)
            self.labels.flags.writeable = False

    # -- basic accessors -------------------------------------------------

    @property
    def n(self) -> int:
        return self.indptr.size - 1

    @property
    def m(self) -> int:
        return self.indices.size // 2

    @property
    def two_m(self) -> int:
        """Total degree sum (graph volume)."""
        return self.indices.size

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        i = np.searchsorted(row, v)
        return i < row.size and row[i] == v

    def edges(self) -> Iterable[tuple[int, int]]:
        """Canonical (u, v) with u < v, ascending."""
        for u in range(self.n):
            for v in self.neighbors(u):
                if u < v:
                    yield u, int(v)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Graph)
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"

    def _check_node(self, v: int):
        if not 0 <= v < self.n:
            raise InvalidEdgeError(f"node {v} out of range [0, {self.n})")

    # -- value-semantics mutators ----------------------------------------

    def insert_edge(self, u: int, v: int) -> "Graph":
        self._check_node(u)
        self._check_node(v)
        if u == v:
            raise InvalidEdgeError("self-loops are not allowed")
        if self.has_edge(u, v):
            raise InvalidEdgeError(f"edge ({u}, {v}) already present")
        pu = self.indptr[u] + np.searchsorted(self.neighbors(u), v)
        pv = self.indptr[v] + np.searchsorted(self.neighbors(v), u)
        indices = np.insert(self.indices, [int(pu), int(pv)], [v, u])
        grid = np.arange(self.n + 1)
        indptr = self.indptr + (grid > u).astype(np.int64) + (grid > v)
        return Graph(indptr, indices, self.labels)

    def delete_edge(self, u: int, v: int) -> "Graph":
        self._check_node(u)
        self._check_node(v)
        if u == v or not self.has_edge(u, v):
            raise InvalidEdgeError(f"edge ({u}, {v}) not present")
        pu = self.indptr[u] + np.searchsorted(self.neighbors(u), v)
        pv = self.indptr[v] + np.searchsorted(self.neighbors(v), u)
        indices = np.delete(self.indices, [int(pu), int(pv)])
        grid = np.arange(self.n + 1)
        indptr = self.indptr - (grid > u).astype(np.int64) - (grid > v)
        return Graph(indptr, indices, self.labels)


def from_edges(n: int, edges: Iterable[tuple[int, int]],
               labels: np.ndarray | None = None) -> Graph:
    """Build a Graph on nodes 0..n-1 from an iterable of distinct pairs."""
    if n <= 0:
        raise EmptyGraphError("graph needs at least one node")
    seen = set()
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise InvalidEdgeError(f"edge ({u}, {v}) out of range [0, {n})")
        if u == v:
            raise InvalidEdgeError("self-loops are not allowed")
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise InvalidEdgeError(f"duplicate edge ({u}, {v})")
        seen.add(key)
    deg = np.zeros(n, dtype=np.int64)
    for u, v in seen:
        deg[u] += 1
        deg[v] += 1
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    indices = np.empty(int(indptr[-1]), dtype=np.int64)
    pos = indptr[:-1].copy()
    for u, v in sorted(seen):
        indices[pos[u]] = v
        pos[u] += 1
        indices[pos[v]] = u
        pos[v] += 1
    # rows were filled in ascending neighbor order for u, not for v
    for v in range(n):
        indices[indptr[v]:indptr[v + 1]] = np.sort(indices[indptr[v]:indptr[v + 1]])
    return Graph(indptr, indices, labels)


def parse_edge_list(source) -> Graph:
    """Parse edge-list text (str, open file, or iterable of lines)."""
    if isinstance(source, str):
        lines = source.splitlines()
    elif isinstance(source, io.IOBase) or hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        lines = list(source)
    pairs = set()
    loops = 0
    duplicates = 0
    for line_no, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        tokens = text.split()
        if len(tokens) != 2:
            raise ParseError(f"expected 'u v', got {raw.strip()!r}", line_no)
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise ParseError(f"non-integer node id in {raw.strip()!r}", line_no)
        if u == v:
            loops += 1
            continue
        key = (u, v) if u < v else (v, u)
        if key in pairs:
            duplicates += 1
        else:
            pairs.add(key)
    if loops:
        logger.warning("dropped %d self-loop(s)", loops)
    if duplicates:
        logger.warning("collapsed %d duplicate edge(s)", duplicates)
    if not pairs:
        raise EmptyGraphError("edge list contains no usable edges")
    ids = sorted({x for e in pairs for x in e})
    remap = {orig: i for i, orig in enumerate(ids)}
    edges = [(remap[u], remap[v]) for u, v in pairs]
    return from_edges(len(ids), edges, labels=np.array(ids, dtype=np.int64))


def to_edge_list_text(graph: Graph) -> str:
    """Serialize back to the edge-list format (original ids if known)."""
    labels = graph.labels
    out = []
    for u, v in graph.edges():
        if labels is not None:
            u, v = int(labels[u]), int(labels[v])
        out.append(f"{u} {v}")
    return "\n".join(out) + "\n"


def largest_connected_component(graph: Graph) -> tuple[Graph, np.ndarray]:
    """The largest component and the old->new id map (-1 for dropped nodes).

    Ties go to the component holding the smallest original id.
    """
    label = _kernels.component_labels(graph.indptr, graph.indices)
    ncomp = int(label.max()) + 1
    sizes = np.bincount(label, minlength=ncomp)
    best = None
    originals = graph.labels if graph.labels is not None else np.arange(graph.n)
    for c in range(ncomp):
        min_orig = int(originals[label == c].min())
        key = (-int(sizes[c]), min_orig)
        if best is None or key < best[0]:
            best = (key, c)
    keep = np.flatnonzero(label == best[1])
    mapping = np.full(graph.n, -1, dtype=np.int64)
    mapping[keep] = np.arange(keep.size)
    edges = [
        (int(mapping[u]), int(mapping[v]))
        for u, v in graph.edges()
        if mapping[u] >= 0 and mapping[v] >= 0
    ]
    labels = originals[keep].astype(np.int64)
    return from_edges(keep.size, edges, labels=labels), mapping


def is_connected(graph: Graph) -> bool:
    # memoized on the instance: edge edits build new Graph objects
    cached = getattr(graph, "_connected", None)
    if cached is None:
        if graph.n == 0:
            cached = False
        else:
            label = _kernels.component_labels(graph.indptr, graph.indices)
            cached = int(label.max()) == 0
        graph._connected = cached
    return cached


def eccentricity_from(graph: Graph, root: int) -> int:
    """Longest BFS distance from root; requires a connected graph."""
    graph._check_node(root)
    _, depth = _kernels.bfs_tree(graph.indptr, graph.indices, root)
    if int(depth.min()) < 0:
        raise ConnectivityError("graph is not connected")
    return int(depth.max())


def bridge_edges(graph: Graph) -> set[tuple[int, int]]:
    """Canonical (u, v) pairs whose removal disconnects the graph."""
    mask = _kernels.bridge_mask(graph.indptr, graph.indices)
    out = set()
    for u in range(graph.n):
        row = graph.neighbors(u)
        flags = mask[graph.indptr[u]:graph.indptr[u + 1]]
        for v, f in zip(row, flags):
            if f and u < v:
                out.add((u, int(v)))
    return out
