"""Verification battery: exhaustive identity checks on small graphs.

The randomized estimator rests on a handful of combinatorial facts
(path matching against 2-forests, estimator unbiasedness, resistance as
a tree fraction, edge-conditioned tree decompositions, transformation
degrees). Each fact gets a check that enumerates everything on a small
graph with plain-python data structures and compares against both the
closed-form answer and the production code paths.

Also hosts the small graph generators used by checks, tests and demos.
"""

from __future__ import annotations

import math
from collections import Counter
from itertools import combinations, permutations

import numpy as np

from ._rng import SplitMix64
from .estimator import (contribution_fenwick, contribution_naive,
                        reference_tree)
from .exact import (all_two_forests, effective_resistance_exact,
                    effective_resistance_iterative, enumerate_spanning_trees,
                    kemeny_eigen, kemeny_forest_formula, path_mapping_sets)
from .graph import Graph, from_edges
from .spanning import count_cut_crossings, cut_link, link_cut

# -- generators ------------------------------------------------------


def complete_graph(n: int) -> Graph:
    return from_edges(n, list(combinations(range(n), 2)))


def path_graph(n: int) -> Graph:
    return from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    edges = [(i, i + 1) for i in range(n - 1)] + [(0, n - 1)]
    return from_edges(n, edges)


def star_graph(n: int) -> Graph:
    return from_edges(n, [(0, i) for i in range(1, n)])


def wheel_graph(n: int) -> Graph:
    """Hub 0 joined to an (n-1)-cycle. Hub eccentricity is 1."""
    if n < 4:
        raise ValueError("wheel needs at least 4 nodes")
    rim = list(range(1, n))
    edges = [(0, i) for i in rim]
    edges += [(rim[i], rim[(i + 1) % len(rim)]) for i in range(len(rim))]
    return from_edges(n, edges)


def connected_graphs_upto_iso(n: int) -> list[Graph]:
    """All connected graphs on n nodes, one per isomorphism class."""
    if not 1 <= n <= 5:
        raise ValueError("exhaustive enumeration is capped at 5 nodes")
    pairs = list(combinations(range(n), 2))
    pair_index = {p: i for i, p in enumerate(pairs)}
    perms = list(permutations(range(n)))
    seen = set()
    out = []
    for mask in range(1 << len(pairs)):
        edges = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        if len(edges) < n - 1:
            continue
        if not _edges_connected(n, edges):
            continue
        canon = mask
        for perm in perms:
            pm = 0
            for a, b in edges:
                x, y = perm[a], perm[b]
                pm |= 1 << pair_index[(x, y) if x < y else (y, x)]
            if pm < canon:
                canon = pm
        if canon in seen:
            continue
        seen.add(canon)
        out.append(from_edges(n, edges))
    return out


def _edges_connected(n: int, edges: list[tuple[int, int]]) -> bool:
    if n == 1:
        return True
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = [False] * n
    seen[0] = True
    stack = [0]
    count = 1
    while stack:
        for y in adj[stack.pop()]:
            if not seen[y]:
                seen[y] = True
                count += 1
                stack.append(y)
    return count == n


def random_connected_graph(n: int, rng: np.random.Generator,
                           extra_prob: float = 0.35) -> Graph:
    """Uniform random tree skeleton plus Bernoulli extra edges."""
    edges = set()
    for v in range(1, n):
        edges.add((int(rng.integers(0, v)), v))
    for a, b in combinations(range(n), 2):
        if (a, b) not in edges and rng.random() < extra_prob:
            edges.add((a, b))
    return from_edges(n, sorted(edges))


def gnp_random_graph(n: int, p: float, seed: int) -> Graph:
    """Sparse Erdos-Renyi sample by geometric skipping; may be disconnected."""
    rng = np.random.default_rng(seed)
    edges = []
    i, j = 0, 0
    while True:
        j += int(rng.geometric(p))
        while j >= n and i < n - 1:
            i += 1
            j = i + 1 + (j - n)
        if j >= n or i >= n - 1:
            break
        edges.append((i, j))
    return from_edges(n, edges)


# -- plain-python tree scaffolding ------------------------------------


def _canon(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


def _tree_adjacency(n: int, edge_list) -> list[list[int]]:
    adj = [[] for _ in range(n)]
    for a, b in edge_list:
        adj[a].append(b)
        adj[b].append(a)
    for lst in adj:
        lst.sort()
    return adj


def _orient_with_stamps(adj: list[list[int]], root: int):
    """parent plus entry/exit stamps from one ascending DFS."""
    n = len(adj)
    parent = [-1] * n
    tin = [0] * n
    tout = [0] * n
    visited = [False] * n
    stamp = 0
    stack = [(root, 0)]
    while stack:
        node, pos = stack[-1]
        if pos == 0:
            stamp += 1
            tin[node] = stamp
            visited[node] = True
        moved = False
        neighbors = adj[node]
        while pos < len(neighbors):
            nxt = neighbors[pos]
            pos += 1
            if not visited[nxt]:
                stack[-1] = (node, pos)
                parent[nxt] = node
                stack.append((nxt, 0))
                moved = True
                break
        if not moved:
            tout[node] = stamp
            stack.pop()
    return parent, tin, tout


def _bfs_parent(graph: Graph, root: int) -> list[int]:
    parent = [-1] * graph.n
    seen = [False] * graph.n
    seen[root] = True
    queue = [root]
    head = 0
    while head < len(queue):
        x = queue[head]
        head += 1
        for y in graph.neighbors(x):
            y = int(y)
            if not seen[y]:
                seen[y] = True
                parent[y] = x
                queue.append(y)
    return parent


def _graph_edge_bits(graph: Graph):
    edges = sorted(graph.edges())
    return edges, {e: i for i, e in enumerate(edges)}


def _tree_mask(edge_list, eid) -> int:
    mask = 0
    for a, b in edge_list:
        mask |= 1 << eid[_canon(a, b)]
    return mask


# -- identity checks ---------------------------------------------------


def check_forest_formula(graph: Graph, tol: float = 1e-8) -> int:
    """2-forest enumeration formula agrees with the spectral value."""
    want = kemeny_eigen(graph)
    got = kemeny_forest_formula(graph, root=0)
    assert abs(got - want) <= tol * max(1.0, abs(want)), \
        f"forest formula {got!r} vs spectral {want!r}"
    return 1


def check_path_mapping(graph: Graph) -> int:
    """Forward-minus-reverse matches hit each separating 2-forest once.

    Exhaustive over every root, every start node, every spanning tree,
    with breadth-first reference paths. Also cross-checks the production
    mapping function and the 2-forest enumeration on the way.
    """
    n = graph.n
    edges, eid = _graph_edge_bits(graph)
    trees = enumerate_spanning_trees(graph, 0)
    tree_edges = [sorted(t.edges()) for t in trees]
    tree_adjs = [_tree_adjacency(n, el) for el in tree_edges]
    tree_masks = [_tree_mask(el, eid) for el in tree_edges]

    # distinct 2-forests with one side recorded as a node bitmask
    forest_side: dict[int, int] = {}
    for adj, tmask in zip(tree_adjs, tree_masks):
        parent, tin, tout = _orient_with_stamps(adj, 0)
        for c in range(n):
            if parent[c] < 0:
                continue
            fmask = tmask & ~(1 << eid[_canon(c, parent[c])])
            if fmask in forest_side:
                continue
            side = 0
            for x in range(n):
                if tin[c] <= tin[x] <= tout[c]:
                    side |= 1 << x
            forest_side[fmask] = side

    # the production enumeration must agree on the distinct forest set
    prod = all_two_forests(graph, 0, trees)
    prod_masks = {_tree_mask(sorted(f.edges), eid) for f in prod}
    assert prod_masks == set(forest_side), "2-forest enumerations disagree"

    cases = 0
    for r in range(n):
        oriented = [_orient_with_stamps(adj, r) for adj in tree_adjs]
        bfs_up = _bfs_parent(graph, r)
        for u in range(n):
            if u == r:
                continue
            path = [u]
            while path[-1] != r:
                path.append(bfs_up[path[-1]])
            net: Counter = Counter()
            for (parent, tin, tout), tmask in zip(oriented, tree_masks):
                tu = tin[u]
                for x, y in zip(path, path[1:]):
                    if parent[x] == y and tin[x] <= tu <= tout[x]:
                        net[tmask & ~(1 << eid[_canon(x, y)])] += 1
                    if parent[y] == x and tin[y] <= tu <= tout[y]:
                        net[tmask & ~(1 << eid[_canon(x, y)])] -= 1
            net = Counter({k: c for k, c in net.items() if c != 0})
            want = Counter()
            for fmask, side in forest_side.items():
                if (side >> u & 1) != (side >> r & 1):
                    want[fmask] = 1
            assert net == want, \
                f"mapping multiset mismatch at root={r}, start={u}"
            cases += 1

    # spot-check the public mapping API against the fast sweep above
    r = 0
    bfs_up = _bfs_parent(graph, r)
    rooted = enumerate_spanning_trees(graph, r)
    for u in range(1, n):
        path = [u]
        while path[-1] != r:
            path.append(bfs_up[path[-1]])
        for t in rooted[:64]:
            fwd, rev = path_mapping_sets(t, path, graph)
            for forest in fwd + rev:
                assert forest.root_side | forest.cut_side == frozenset(range(n))
                assert r in forest.root_side and u in forest.cut_side
    return cases


def check_exhaustive_mean(graph: Graph, root: int = 0,
                          policies=("bfs", "dfs", "wilson"),
                          tol: float = 1e-8) -> int:
    """Average contribution over all spanning trees equals the target.

    Both evaluation strategies must produce the same integer per tree,
    for every reference tree policy.
    """
    want = kemeny_eigen(graph)
    trees = enumerate_spanning_trees(graph, root)
    two_m = graph.two_m
    cases = 0
    for policy in policies:
        ref = reference_tree(graph, root, policy, seed=7)
        total = 0
        for t in trees:
            a = contribution_naive(t, ref, graph)
            b = contribution_fenwick(t, ref, graph)
            assert a == b, f"evaluation strategies disagree: {a} != {b}"
            total += a
        got = total / (two_m * len(trees))
        assert abs(got - want) <= tol * max(1.0, abs(want)), \
            f"exhaustive mean {got!r} vs spectral {want!r} ({policy})"
        cases += len(trees)
    return cases


def check_insert_split(base: Graph, edge: tuple[int, int],
                       tol: float = 1e-8) -> int:
    """Tree decomposition by a new edge: fraction, resistance, mixture.

    With the edge added, trees split into those avoiding it (exactly the
    old graph's trees) and those containing it; the containing fraction
    is the edge's effective resistance, and mixing the two groups' mean
    contributions by that fraction reproduces the new Kemeny constant.
    """
    a, b = edge
    grown = base.insert_edge(a, b)
    _, eid = _graph_edge_bits(grown)
    ebit = 1 << eid[_canon(a, b)]
    trees = enumerate_spanning_trees(grown, 0)
    masks = [_tree_mask(sorted(t.edges()), eid) for t in trees]
    with_e = [t for t, mk in zip(trees, masks) if mk & ebit]
    without = [t for t, mk in zip(trees, masks) if not mk & ebit]
    assert with_e and without

    frac = len(with_e) / len(trees)
    r_exact = effective_resistance_exact(grown, a, b)
    r_iter = effective_resistance_iterative(grown, a, b)
    assert abs(frac - r_exact) <= 1e-9, f"{frac} vs {r_exact}"
    assert abs(r_iter - r_exact) <= 1e-6

    base_masks = {_tree_mask(sorted(t.edges()), eid)
                  for t in enumerate_spanning_trees(base, 0)}
    assert base_masks == {mk for mk in masks if not mk & ebit}, \
        "trees avoiding the new edge are not the old tree set"

    ref = reference_tree(base, 0, "bfs", seed=7)
    f_with = [contribution_naive(t, ref, grown) for t in with_e]
    f_without = [contribution_naive(t, ref, grown) for t in without]
    mixed = ((1.0 - frac) * (math.fsum(f_without) / len(without))
             + frac * (math.fsum(f_with) / len(with_e)))
    want = kemeny_eigen(grown)
    got = mixed / grown.two_m
    assert abs(got - want) <= tol * max(1.0, abs(want)), \
        f"mixture estimate {got!r} vs spectral {want!r}"
    return len(trees)


def check_edge_neighborhoods(base: Graph, edge: tuple[int, int],
                             tol: float = 1e-9) -> int:
    """Local surgery structure across the edge/no-edge tree bipartition.

    For each tree without the edge, adding it and cutting one cycle edge
    reaches exactly the trees whose count matches the cycle length; for
    each tree with the edge, cutting it and linking one crossing edge
    reaches back. Degrees, handshake, symmetry and both weighted
    transport identities are checked, plus the production surgery
    helpers land inside the enumerated neighborhoods.
    """
    a, b = edge
    grown = base.insert_edge(a, b)
    n = grown.n
    _, eid = _graph_edge_bits(grown)
    ebit = 1 << eid[_canon(a, b)]
    trees = enumerate_spanning_trees(grown, 0)
    masks = [_tree_mask(sorted(t.edges()), eid) for t in trees]
    index_of = {mk: i for i, mk in enumerate(masks)}
    has_e = [bool(mk & ebit) for mk in masks]

    ref = reference_tree(base, 0, "bfs", seed=7)
    f_grown = [contribution_naive(t, ref, grown) for t in trees]

    out_nbrs: dict[int, list[int]] = {}
    in_nbrs: dict[int, list[int]] = {}
    d_out: dict[int, int] = {}
    d_in: dict[int, int] = {}

    for i, t in enumerate(trees):
        adj = _tree_adjacency(n, sorted(t.edges()))
        parent, tin, tout = _orient_with_stamps(adj, 0)
        if not has_e[i]:
            # cycle path between the endpoints, found by climbing
            up_a = {}
            x = a
            while x != -1:
                up_a[x] = True
                x = parent[x]
            x = b
            while x not in up_a:
                x = parent[x]
            meet = x
            path_edges = []
            for start in (a, b):
                x = start
                while x != meet:
                    path_edges.append(_canon(x, parent[x]))
                    x = parent[x]
            d_out[i] = len(path_edges)
            nbrs = []
            for g in path_edges:
                nmask = (masks[i] & ~(1 << eid[g])) | ebit
                assert nmask in index_of, "surgery left the tree set"
                assert has_e[index_of[nmask]]
                nbrs.append(index_of[nmask])
            out_nbrs[i] = nbrs
        else:
            child = a if parent[a] == b else b
            inside = {x for x in range(n) if tin[child] <= tin[x] <= tout[child]}
            crossing = [e for e in base.edges()
                        if (e[0] in inside) != (e[1] in inside)]
            d_in[i] = len(crossing)
            prod_d = count_cut_crossings(t, base, a, b)
            assert prod_d == len(crossing), \
                f"crossing count {prod_d} vs enumerated {len(crossing)}"
            nbrs = []
            for g in crossing:
                nmask = (masks[i] & ~ebit) | (1 << eid[_canon(*g)])
                assert nmask in index_of, "relink left the tree set"
                assert not has_e[index_of[nmask]]
                nbrs.append(index_of[nmask])
            in_nbrs[i] = nbrs

    # degree bookkeeping and symmetry of the bipartite adjacency
    assert sum(d_out.values()) == sum(d_in.values()), "handshake failed"
    for i, nbrs in out_nbrs.items():
        assert len(set(nbrs)) == len(nbrs) == d_out[i]
        for j in nbrs:
            assert i in in_nbrs[j], "asymmetric neighborhood"
    for j, nbrs in in_nbrs.items():
        assert len(set(nbrs)) == len(nbrs) == d_in[j]
        for i in nbrs:
            assert j in out_nbrs[i], "asymmetric neighborhood"

    # transport identities behind the importance-weight updates:
    # pushing mass along out-neighbors with d ratios recovers the
    # with-edge total, and back along in-neighbors the without total
    push = math.fsum(f_grown[j] / d_in[j]
                     for i, nbrs in out_nbrs.items() for j in nbrs)
    want_with = math.fsum(f_grown[j] for j in in_nbrs)
    assert abs(push - want_with) <= tol * max(1.0, abs(want_with)), \
        f"insert transport {push!r} vs {want_with!r}"
    pull = math.fsum(f_grown[i] / d_out[i]
                     for j, nbrs in in_nbrs.items() for i in nbrs)
    want_without = math.fsum(f_grown[i] for i in out_nbrs)
    assert abs(pull - want_without) <= tol * max(1.0, abs(want_without)), \
        f"delete transport {pull!r} vs {want_without!r}"

    # the production surgeries must land inside the enumerated sets
    rng = SplitMix64(12345)
    for i, t in enumerate(trees[:50]):
        if not has_e[i]:
            work = t.copy()
            d = link_cut(work, a, b, rng)
            assert d == d_out[i]
            wmask = _tree_mask(sorted(work.edges()), eid)
            assert index_of[wmask] in out_nbrs[i]
        else:
            work = t.copy()
            d = cut_link(work, a, b, base, rng)
            assert d == d_in[i]
            wmask = _tree_mask(sorted(work.edges()), eid)
            assert index_of[wmask] in in_nbrs[i]
    return len(trees)


def non_edges(graph: Graph) -> list[tuple[int, int]]:
    out = []
    for a, b in combinations(range(graph.n), 2):
        if not graph.has_edge(a, b):
            out.append((a, b))
    return out


def run_battery(max_n: int = 6, per_size: int = 10, seed: int = 0) -> dict:
    """Run every check over a graph family; returns counts and failures."""
    rng = np.random.default_rng(seed)
    family: list[Graph] = []
    for n in range(2, min(max_n, 5) + 1):
        family.extend(connected_graphs_upto_iso(n))
    for n in range(6, max_n + 1):
        for _ in range(per_size):
            family.append(random_connected_graph(n, rng))

    report = {"graphs": len(family), "checks": {}, "failures": []}

    def run(name, fn, *args):
        try:
            cases = fn(*args)
        except AssertionError as exc:
            report["failures"].append({"check": name, "detail": str(exc)})
            return
        report["checks"][name] = report["checks"].get(name, 0) + int(cases)

    for gi, graph in enumerate(family):
        run("forest_formula", check_forest_formula, graph)
        run("exhaustive_mean", check_exhaustive_mean, graph)
        run("path_mapping", check_path_mapping, graph)
        gaps = non_edges(graph)
        if gaps:
            pick = gaps[int(rng.integers(0, len(gaps)))]
            run("insert_split", check_insert_split, graph, pick)
            run("edge_neighborhoods", check_edge_neighborhoods, graph, pick)
    report["ok"] = not report["failures"]
    return report
