"""Exact reference computations: spectral Kemeny values, effective
resistance, spanning-tree counting and enumeration, and the 2-forest
quantities the sampling estimator is built on.

Everything here favors correctness over speed. The enumeration routines
are exponential by nature and guarded by hard caps; they exist so the
randomized code paths can be checked against ground truth on small
graphs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse

from .errors import (CapacityError, ConnectivityError, ConvergenceError,
                     EmptyGraphError, InvalidEdgeError, InvalidPathError)
from .graph import Graph, is_connected
from .spanning import RootedTree

_DENSE_SPECTRUM_CAP = 20_000
_DENSE_RESISTANCE_CAP = 2_000
_EXACT_DET_CAP = 64
_FLOAT_DET_CAP = 500
_ENUM_TREE_CAP = 1_000_000

# eigenvalues below this are treated as the zero mode
_NULL_EIGENVALUE_TOL = 1e-10


def _require_edges(graph: Graph):
    if graph.m == 0:
        raise EmptyGraphError("graph has no edges")


def spectrum(graph: Graph) -> np.ndarray:
    """Eigenvalues of the random-walk normalized Laplacian, ascending.

    Dense computation; refuses graphs beyond the size guard.
    """
    _require_edges(graph)
    if graph.n > _DENSE_SPECTRUM_CAP:
        raise CapacityError(
            f"dense spectrum needs n <= {_DENSE_SPECTRUM_CAP}, got {graph.n}")
    deg = graph.degrees.astype(np.float64)
    if (deg == 0).any():
        raise ConnectivityError("graph has an isolated node")
    inv_sqrt = 1.0 / np.sqrt(deg)
    n = graph.n
    lap = np.eye(n)
    for v in range(n):
        lo, hi = graph.indptr[v], graph.indptr[v + 1]
        for w in graph.indices[lo:hi]:
            lap[v, w] -= inv_sqrt[v] * inv_sqrt[w]
    return np.linalg.eigvalsh(lap)


def kemeny_eigen(graph: Graph) -> float:
    """Kemeny constant as the sum of reciprocal nonzero eigenvalues.

    This is the primary oracle the sampling estimator is validated
    against.
    """
    eig = spectrum(graph)
    if graph.n >= 2 and eig[1] < _NULL_EIGENVALUE_TOL:
        raise ConnectivityError("graph is not connected")
    return float(np.sum(1.0 / eig[1:]))


def effective_resistance_exact(graph: Graph, u: int, v: int) -> float:
    """Two-point effective resistance via the Laplacian pseudoinverse."""
    graph._check_node(u)
    graph._check_node(v)
    if u == v:
        raise InvalidEdgeError("resistance endpoints must differ")
    if graph.n > _DENSE_RESISTANCE_CAP:
        raise CapacityError(
            f"dense resistance needs n <= {_DENSE_RESISTANCE_CAP}, got {graph.n}")
    if not is_connected(graph):
        raise ConnectivityError("graph is not connected")
    n = graph.n
    lap = np.zeros((n, n))
    for x in range(n):
        lo, hi = graph.indptr[x], graph.indptr[x + 1]
        lap[x, x] = hi - lo
        for w in graph.indices[lo:hi]:
            lap[x, w] -= 1.0
    pinv = np.linalg.pinv(lap)
    return float(pinv[u, u] + pinv[v, v] - 2.0 * pinv[u, v])


def effective_resistance_iterative(graph: Graph, u: int, v: int,
                                   rel_tol: float = 1e-8,
                                   max_iter: int | None = None) -> float:
    """Effective resistance by conjugate gradients on the Laplacian.

    Jacobi (degree) preconditioning, solution pinned to component sum
    zero. Converges when the residual drops below rel_tol relative to
    the right-hand side; raises ConvergenceError at the iteration cap.
    """
    graph._check_node(u)
    graph._check_node(v)
    if u == v:
        raise InvalidEdgeError("resistance endpoints must differ")
    if not is_connected(graph):
        raise ConnectivityError("graph is not connected")
    n = graph.n
    adj = scipy.sparse.csr_matrix(
        (np.ones(graph.indices.size), graph.indices, graph.indptr),
        shape=(n, n))
    deg = graph.degrees.astype(np.float64)
    b = np.zeros(n)
    b[u] = 1.0
    b[v] = -1.0
    b_norm = math.sqrt(2.0)
    cap = int(max_iter) if max_iter is not None else 10 * n

    x = np.zeros(n)
    r = b.copy()
    z = r / deg
    z -= z.mean()
    p = z.copy()
    rz = float(r @ z)
    converged = False
    for _ in range(cap):
        if float(np.linalg.norm(r)) <= rel_tol * b_norm:
            converged = True
            break
        ap = deg * p - adj @ p
        pap = float(p @ ap)
        if pap <= 0.0:
            break
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        z = r / deg
        z -= z.mean()
        rz_next = float(r @ z)
        p = z + (rz_next / rz) * p
        rz = rz_next
    else:
        converged = float(np.linalg.norm(r)) <= rel_tol * b_norm
    if not converged and float(np.linalg.norm(r)) > rel_tol * b_norm:
        raise ConvergenceError(
            f"resistance solve did not converge within {cap} iterations")
    x -= x.mean()
    return float(x[u] - x[v])


def _det_exact(mat: list[list[int]]) -> int:
    """Fraction-free integer determinant (Bareiss)."""
    n = len(mat)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if mat[k][k] == 0:
            for i in range(k + 1, n):
                if mat[i][k] != 0:
                    mat[k], mat[i] = mat[i], mat[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = mat[k][k]
        for i in range(k + 1, n):
            row_i = mat[i]
            row_k = mat[k]
            lead = row_i[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * pivot - lead * row_k[j]) // prev
        prev = pivot
    return sign * mat[n - 1][n - 1]


def count_spanning_trees(graph: Graph) -> int:
    """Number of spanning trees (a Laplacian cofactor).

    Exact integer arithmetic up to the exact-determinant cap; a rounded
    float determinant beyond that (exact only while counts stay within
    float precision); refused past the float cap.
    """
    _require_edges(graph)
    n = graph.n
    if n == 1:
        return 1
    if n > _FLOAT_DET_CAP:
        raise CapacityError(
            f"tree counting needs n <= {_FLOAT_DET_CAP}, got {n}")
    if n <= _EXACT_DET_CAP:
        red = [[0] * (n - 1) for _ in range(n - 1)]
        for x in range(1, n):
            lo, hi = graph.indptr[x], graph.indptr[x + 1]
            red[x - 1][x - 1] = int(hi - lo)
            for w in graph.indices[lo:hi]:
                if w >= 1:
                    red[x - 1][int(w) - 1] -= 1
        return _det_exact(red)
    lap = np.zeros((n - 1, n - 1))
    for x in range(1, n):
        lo, hi = graph.indptr[x], graph.indptr[x + 1]
        lap[x - 1, x - 1] = hi - lo
        for w in graph.indices[lo:hi]:
            if w >= 1:
                lap[x - 1, int(w) - 1] -= 1.0
    sign, logdet = np.linalg.slogdet(lap)
    if sign <= 0:
        return 0
    return int(round(math.exp(logdet)))


def _orient_edges(n: int, edge_list: list[tuple[int, int]], root: int) -> RootedTree:
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in edge_list:
        adj[a].append(b)
        adj[b].append(a)
    parent = np.full(n, -2, dtype=np.int64)
    parent[root] = -1
    stack = [root]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if parent[y] == -2:
                parent[y] = x
                stack.append(y)
    return RootedTree(parent, root)


def enumerate_spanning_trees(graph: Graph, root: int = 0) -> list[RootedTree]:
    """Every spanning tree, rooted at `root`, by contraction/deletion.

    Deterministic order. Guarded by the enumeration cap.
    """
    graph._check_node(root)
    if graph.n == 1:
        return [RootedTree(np.array([-1], dtype=np.int64), 0)]
    if not is_connected(graph):
        return []
    total = count_spanning_trees(graph)
    if total > _ENUM_TREE_CAP:
        raise CapacityError(
            f"{total} spanning trees exceeds the enumeration cap {_ENUM_TREE_CAP}")
    base = sorted(graph.edges())

    def connected(edges: list[tuple[int, int, int]], alive: frozenset[int]) -> bool:
        if len(alive) == 1:
            return True
        uf = {x: x for x in alive}

        def find(x: int) -> int:
            while uf[x] != x:
                uf[x] = uf[uf[x]]
                x = uf[x]
            return x

        parts = len(alive)
        for _, a, b in edges:
            ra, rb = find(a), find(b)
            if ra != rb:
                uf[ra] = rb
                parts -= 1
                if parts == 1:
                    return True
        return parts == 1

    results: list[list[int]] = []
    start = [(i, a, b) for i, (a, b) in enumerate(base)]
    stack = [(start, frozenset(range(graph.n)), [])]
    while stack:
        edges, alive, taken = stack.pop()
        while len(alive) > 1:
            eid, a, b = edges[0]
            rest = edges[1:]
            if connected(rest, alive):
                stack.append((rest, alive, taken))
            # contract (a, b): relabel b as a, drop the loops this makes
            merged = []
            for fid, x, y in rest:
                if x == b:
                    x = a
                if y == b:
                    y = a
                if x != y:
                    merged.append((fid, x, y))
            edges = merged
            alive = alive - {b}
            taken = taken + [eid]
        results.append(taken)
    return [_orient_edges(graph.n, [base[i] for i in ids], root)
            for ids in results]


@dataclass(frozen=True)
class TwoForest:
    """Spanning 2-forest: a node partition plus the surviving tree edges.

    `root_side` is the component holding the designated root node.
    """

    root_side: frozenset[int]
    cut_side: frozenset[int]
    edges: frozenset[tuple[int, int]]

    def root_volume(self, graph: Graph) -> int:
        deg = graph.degrees
        return int(sum(int(deg[x]) for x in self.root_side))


def _forest_from_cut(tree: RootedTree, child: int) -> TwoForest:
    sub = frozenset(int(z) for z in tree.subtree_nodes(child))
    rest = frozenset(range(tree.n)) - sub
    p = int(tree.parent[child])
    cut = (child, p) if child < p else (p, child)
    return TwoForest(root_side=rest, cut_side=sub, edges=tree.edges() - {cut})


def all_two_forests(graph: Graph, root: int,
                    trees: list[RootedTree] | None = None) -> list[TwoForest]:
    """Every spanning 2-forest, cut sides taken relative to `root`.

    Each forest appears once (forests arise from several trees; they are
    deduplicated on their edge set). Pass `trees` to reuse an existing
    enumeration rooted at the same node.
    """
    if trees is None:
        trees = enumerate_spanning_trees(graph, root)
    seen: set[frozenset[tuple[int, int]]] = set()
    out: list[TwoForest] = []
    for tree in trees:
        for child in range(tree.n):
            if tree.parent[child] < 0:
                continue
            forest = _forest_from_cut(tree, child)
            if forest.edges in seen:
                continue
            seen.add(forest.edges)
            out.append(forest)
    return out


def enumerate_two_forests(graph: Graph, root: int, u: int) -> list[TwoForest]:
    """Spanning 2-forests whose cut separates `u` from `root`."""
    graph._check_node(u)
    if u == root:
        raise InvalidEdgeError("separating node must differ from the root")
    return [f for f in all_two_forests(graph, root) if u in f.cut_side]


def kemeny_forest_formula(graph: Graph, root: int = 0) -> float:
    """Kemeny constant from the 2-forest identity, by full enumeration.

    Groups the double sum over (node, separating forest) into one pass
    over distinct forests: each contributes vol(root side) times
    vol(cut side).
    """
    _require_edges(graph)
    if not is_connected(graph):
        raise ConnectivityError("graph is not connected")
    trees = enumerate_spanning_trees(graph, root)
    forests = all_two_forests(graph, root, trees)
    two_m = graph.two_m
    total = 0
    for forest in forests:
        vol1 = forest.root_volume(graph)
        total += vol1 * (two_m - vol1)
    return float(total) / (two_m * len(trees))


def path_mapping_sets(tree: RootedTree, path: list[int],
                      graph: Graph) -> tuple[list[TwoForest], list[TwoForest]]:
    """Forward and reverse 2-forest matches of a tree against a path.

    The path runs from a start node to the tree's root along graph
    edges. A step (x, y) matches forward when the tree also points x up
    to y and the start lies under x; it matches in reverse when the tree
    points y up to x and the start lies under y. Each match yields the
    2-forest made by deleting that tree edge.
    """
    if len(path) < 2:
        raise InvalidPathError("path needs at least two nodes")
    if len(set(path)) != len(path):
        raise InvalidPathError("path nodes must be distinct")
    if path[-1] != tree.root:
        raise InvalidPathError("path must end at the tree root")
    for node in path:
        graph._check_node(node)
    for x, y in zip(path, path[1:]):
        if not graph.has_edge(x, y):
            raise InvalidPathError(f"({x}, {y}) is not a graph edge")

    tin, tout, _ = tree.dfn()
    start = path[0]
    t_start = int(tin[start])
    forward: list[TwoForest] = []
    reverse: list[TwoForest] = []
    for x, y in zip(path, path[1:]):
        if tree.parent[x] == y and tin[x] <= t_start <= tout[x]:
            forward.append(_forest_from_cut(tree, x))
        if tree.parent[y] == x and tin[y] <= t_start <= tout[y]:
            reverse.append(_forest_from_cut(tree, y))
    return forward, reverse
