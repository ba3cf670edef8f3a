"""Rooted spanning trees: deterministic construction, uniform sampling,
and the two local surgeries used by dynamic maintenance.

Trees are parent-pointer arrays (root entry -1, pointers toward the
root). Structure caches (children, DFN stamps, stamp order) are derived
lazily from the parents and dropped on mutation; subtree volumes depend
on the graph's degrees, so they are computed per call and never cached.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from ._rng import SplitMix64
from .errors import ConnectivityError, InvalidEdgeError
from .graph import Graph, is_connected


class RootedTree:
    """Spanning tree with parent pointers toward `root`."""

    __slots__ = ("root", "parent", "_cptr", "_cidx", "_tin", "_tout", "_order")

    def __init__(self, parent: np.ndarray, root: int):
        self.parent = np.ascontiguousarray(parent, dtype=np.int64)
        self.root = int(root)
        self._cptr = self._cidx = None
        self._tin = self._tout = self._order = None

    @property
    def n(self) -> int:
        return self.parent.size

    def invalidate(self):
        """Drop derived caches after a structural change."""
        self._cptr = self._cidx = None
        self._tin = self._tout = self._order = None

    def children(self) -> tuple[np.ndarray, np.ndarray]:
        if self._cptr is None:
            self._cptr, self._cidx = _kernels.children_csr(self.parent)
        return self._cptr, self._cidx

    def dfn(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(tin, tout, order): entry stamps 1..n, interval ends, node-by-stamp."""
        if self._tin is None:
            cptr, cidx = self.children()
            self._tin, self._tout, self._order = _kernels.dfn_order(
                self.parent, cptr, cidx, self.root)
        return self._tin, self._tout, self._order

    def volumes(self, graph: Graph) -> np.ndarray:
        """Sum of graph degrees inside each subtree (recomputed per call)."""
        _, _, order = self.dfn()
        return _kernels.subtree_volumes(self.parent, order, graph.degrees)

    def contains_edge(self, u: int, v: int) -> bool:
        return self.parent[u] == v or self.parent[v] == u

    def edges(self) -> frozenset[tuple[int, int]]:
        out = []
        for v in range(self.n):
            p = int(self.parent[v])
            if p >= 0:
                out.append((v, p) if v < p else (p, v))
        return frozenset(out)

    def path_to_root(self, u: int) -> list[int]:
        path = [u]
        while path[-1] != self.root:
            path.append(int(self.parent[path[-1]]))
        return path

    def distance(self, a: int, b: int) -> int:
        """Number of tree edges between a and b."""
        alen, blen, _ = _kernels.tree_path_meet(self.parent, a, b)
        return int(alen + blen)

    def subtree_nodes(self, v: int) -> np.ndarray:
        tin, tout, order = self.dfn()
        return order[int(tin[v]) - 1:int(tout[v])]

    def copy(self) -> "RootedTree":
        return RootedTree(self.parent.copy(), self.root)

    def validate(self, graph: Graph) -> int:
        """0 if a spanning tree of graph; kernel error code otherwise."""
        return int(_kernels.validate_tree(
            self.parent, self.root, graph.indptr, graph.indices))

    def __repr__(self) -> str:
        return f"RootedTree(n={self.n}, root={self.root})"


def _require_connected_node(graph: Graph, root: int, walk: bool = False):
    graph._check_node(root)
    if graph.n > 1 and graph.degree(root) == 0:
        raise ConnectivityError(f"node {root} is isolated")
    # random walks never terminate on a disconnected graph, so the
    # sampling entry points must check reachability up front
    if walk and not is_connected(graph):
        raise ConnectivityError("graph is not connected")


def bfs_tree(graph: Graph, root: int) -> RootedTree:
    """Breadth-first tree; neighbor order ascending, so fully deterministic."""
    _require_connected_node(graph, root)
    parent, depth = _kernels.bfs_tree(graph.indptr, graph.indices, root)
    if int(depth.min()) < 0:
        raise ConnectivityError("graph is not connected")
    return RootedTree(parent, root)


def dfs_tree(graph: Graph, root: int) -> RootedTree:
    """Depth-first tree with ascending-id tie-break."""
    _require_connected_node(graph, root)
    parent = _kernels.dfs_tree(graph.indptr, graph.indices, root)
    tree = RootedTree(parent, root)
    if tree.validate(graph) != 0:
        raise ConnectivityError("graph is not connected")
    return tree


def wilson_tree(graph: Graph, root: int, rng: SplitMix64) -> tuple[RootedTree, int]:
    """Uniform spanning tree by loop-erased random walks. (tree, walk steps)."""
    _require_connected_node(graph, root, walk=True)
    roots = np.array([root], dtype=np.int64)
    parent, steps, state = _kernels.wilson(
        graph.indptr, graph.indices, roots, np.uint64(rng.state))
    rng.state = int(state)
    return RootedTree(parent, root), int(steps)


def wilson_tree_with_edge(graph: Graph, u: int, v: int, root: int,
                          rng: SplitMix64) -> tuple[RootedTree, int]:
    """Uniform tree among those containing graph edge (u, v), rooted at root.

    Both endpoints absorb the walks (the edge's contraction), the edge is
    then added and parent pointers re-rooted toward `root`.
    """
    if not graph.has_edge(u, v):
        raise InvalidEdgeError(f"({u}, {v}) is not a graph edge")
    _require_connected_node(graph, root, walk=True)
    roots = np.array([u, v], dtype=np.int64)
    parent, steps, state = _kernels.wilson(
        graph.indptr, graph.indices, roots, np.uint64(rng.state))
    rng.state = int(state)
    parent[v] = u
    _kernels.reverse_chain(parent, root, u, -1)
    return RootedTree(parent, root), int(steps)


def link_cut(tree: RootedTree, u: int, v: int, rng: SplitMix64) -> int:
    """Add non-tree edge (u, v), cut a uniform edge of the created cycle.

    Mutates `tree` in place (parents repaired toward the original root)
    and returns the cycle's tree-path length d — the number of candidate
    edges the cut was drawn from.
    """
    if u == v or not (0 <= u < tree.n and 0 <= v < tree.n):
        raise InvalidEdgeError(f"bad edge ({u}, {v})")
    if tree.contains_edge(u, v):
        raise InvalidEdgeError(f"({u}, {v}) is already a tree edge")
    alen, blen, _ = _kernels.tree_path_meet(tree.parent, u, v)
    d = int(alen + blen)
    k = rng.randint(d)
    if k < alen:
        c = _kernels.climb(tree.parent, u, k)
        _kernels.reverse_chain(tree.parent, u, c, v)
    else:
        c = _kernels.climb(tree.parent, v, k - alen)
        _kernels.reverse_chain(tree.parent, v, c, u)
    tree.invalidate()
    return d


def count_cut_crossings(tree: RootedTree, graph: Graph, u: int, v: int) -> int:
    """Graph edges crossing the split made by removing tree edge (u, v),
    never counting (u, v) itself."""
    if tree.parent[u] == v:
        c = u
    elif tree.parent[v] == u:
        c = v
    else:
        raise InvalidEdgeError(f"({u}, {v}) is not a tree edge")
    tin, tout, order = tree.dfn()
    return int(_kernels.count_crossings(
        graph.indptr, graph.indices, tin, order,
        int(tin[c]), int(tout[c]), u, v))


def cut_link(tree: RootedTree, u: int, v: int, graph: Graph,
             rng: SplitMix64) -> int:
    """Remove tree edge (u, v), reconnect with a uniform crossing edge of
    `graph` (excluding (u, v)).

    Mutates `tree` in place and returns the number of crossing candidates
    the link was drawn from. Raises ConnectivityError when no candidate
    exists (the edge is a bridge of `graph`).
    """
    if tree.parent[u] == v:
        c = u
    elif tree.parent[v] == u:
        c = v
    else:
        raise InvalidEdgeError(f"({u}, {v}) is not a tree edge")
    tin, tout, order = tree.dfn()
    lo, hi = int(tin[c]), int(tout[c])
    d = int(_kernels.count_crossings(
        graph.indptr, graph.indices, tin, order, lo, hi, u, v))
    if d == 0:
        raise ConnectivityError(f"removing ({u}, {v}) disconnects the graph")
    k = rng.randint(d)
    w, y = _kernels.kth_crossing(
        graph.indptr, graph.indices, tin, order, lo, hi, u, v, k)
    _kernels.reverse_chain(tree.parent, int(w), c, int(y))
    tree.invalidate()
    return d
