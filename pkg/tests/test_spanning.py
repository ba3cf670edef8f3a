"""Rooted trees, uniform sampling, and the two tree surgeries."""

import numpy as np
import pytest

from kemeny import checks
from kemeny._rng import ROLE_SAMPLE, SplitMix64
from kemeny.errors import ConnectivityError, InvalidEdgeError
from kemeny.exact import enumerate_spanning_trees
from kemeny.graph import bridge_edges, from_edges, parse_edge_list
from kemeny.spanning import (RootedTree, bfs_tree, count_cut_crossings,
                             cut_link, dfs_tree, link_cut, wilson_tree,
                             wilson_tree_with_edge)

K3 = from_edges(3, [(0, 1), (0, 2), (1, 2)])
K4 = from_edges(4, [(a, b) for a in range(4) for b in range(a + 1, 4)])
P3 = from_edges(3, [(0, 1), (1, 2)])


def test_entry_stamps_follow_preorder():
    # chain 0 -> 3 -> 1 -> 2 (root 0): preorder stamps 1,2,3,4 land as below
    tree = RootedTree(np.array([-1, 3, 1, 0]), root=0)
    tin, tout, order = tree.dfn()
    assert list(tin) == [1, 3, 4, 2]
    assert list(order) == [0, 3, 1, 2]
    assert list(tout) == [4, 4, 4, 4]
    assert sorted(tree.subtree_nodes(1)) == [1, 2]
    assert sorted(tree.subtree_nodes(0)) == [0, 1, 2, 3]


def test_children_visited_in_ascending_order():
    star = RootedTree(np.array([-1, 0, 0, 0]), root=0)
    tin, tout, order = star.dfn()
    assert list(order) == [0, 1, 2, 3]
    assert list(tout) == [4, 2, 3, 4]


def test_subtree_volumes_sum_graph_degrees():
    tree = bfs_tree(K4, 0)
    vol = tree.volumes(K4)
    assert vol[0] == K4.two_m
    for v in range(1, 4):
        assert vol[v] == sum(K4.degree(int(x)) for x in tree.subtree_nodes(v))


def test_bfs_tree_depths_are_graph_distances():
    g = parse_edge_list("0 1\n1 2\n2 3\n3 0\n0 4\n")
    tree = bfs_tree(g, 2)
    assert tree.validate(g) == 0
    assert len(tree.path_to_root(4)) - 1 == 3
    assert tree.distance(1, 3) == 2


def test_dfs_tree_is_valid():
    rng = np.random.default_rng(3)
    for _ in range(10):
        g = checks.random_connected_graph(int(rng.integers(2, 10)), rng)
        for root in (0, g.n - 1):
            assert dfs_tree(g, root).validate(g) == 0


def test_tree_helpers():
    tree = bfs_tree(P3, 1)
    assert tree.contains_edge(0, 1) and tree.contains_edge(1, 0)
    assert tree.edges() == frozenset({(0, 1), (1, 2)})
    assert tree.path_to_root(0) == [0, 1]
    assert tree.distance(0, 2) == 2
    assert tree.distance(1, 1) == 0
    clone = tree.copy()
    clone.parent[0] = 2
    assert tree.parent[0] == 1


def test_validate_rejects_broken_trees():
    assert RootedTree(np.array([-1, 2, 1]), 0).validate(P3) != 0  # 1-2 cycle
    assert RootedTree(np.array([-1, 0, 0]), 0).validate(P3) != 0  # (2,0) not an edge
    assert RootedTree(np.array([-1, 0, -1]), 0).validate(P3) != 0  # two roots
    assert RootedTree(np.array([1, 2, -1]), 2).validate(P3) == 0


def test_trees_require_connected_graphs():
    split = parse_edge_list("0 1\n2 3\n")
    rng = SplitMix64(0)
    for build in (lambda: bfs_tree(split, 0),
                  lambda: dfs_tree(split, 0),
                  lambda: wilson_tree(split, 0, rng)[0]):
        with pytest.raises(ConnectivityError):
            build()


def test_random_tree_is_valid_and_reproducible():
    rng = np.random.default_rng(17)
    for _ in range(10):
        g = checks.random_connected_graph(int(rng.integers(2, 14)), rng)
        root = int(rng.integers(g.n))
        seed = int(rng.integers(2**63))
        t1, s1 = wilson_tree(g, root, SplitMix64.for_stream(seed, ROLE_SAMPLE, 0))
        t2, s2 = wilson_tree(g, root, SplitMix64.for_stream(seed, ROLE_SAMPLE, 0))
        assert t1.validate(g) == 0
        assert t1.root == root
        assert (s1, t1.edges()) == (s2, t2.edges())
        assert s1 >= 0


def test_random_trees_reach_every_tree():
    trees = {t.edges() for t in enumerate_spanning_trees(K3, 0)}
    rng = SplitMix64(5)
    seen = {wilson_tree(K3, 0, rng)[0].edges() for _ in range(200)}
    assert seen == trees


def test_walk_step_count_matches_expected_absorption_time():
    # two walkers on K3 rooted at 0: expected loop-erased total is 8/3
    rng = SplitMix64(99)
    total = sum(wilson_tree(K3, 0, rng)[1] for _ in range(4000))
    assert 2.45 < total / 4000 < 2.90


def test_edge_conditioned_trees():
    with_edge = {t.edges() for t in enumerate_spanning_trees(K4, 0)
                 if ((0, 1) in t.edges())}
    assert len(with_edge) == 8
    rng = SplitMix64(7)
    seen = set()
    for _ in range(400):
        tree, _ = wilson_tree_with_edge(K4, 0, 1, 2, rng)
        assert tree.validate(K4) == 0
        assert tree.root == 2
        assert tree.contains_edge(0, 1)
        seen.add(tree.edges())
    assert seen == with_edge
    with pytest.raises(InvalidEdgeError):
        wilson_tree_with_edge(P3, 0, 2, 0, rng)


def test_link_cut_swaps_one_cycle_edge():
    rng_np = np.random.default_rng(8)
    rng = SplitMix64(8)
    for _ in range(30):
        g = checks.random_connected_graph(int(rng_np.integers(4, 12)), rng_np)
        non = checks.non_edges(g)
        if not non:
            continue
        u, v = non[int(rng_np.integers(len(non)))]
        tree, _ = wilson_tree(g, int(rng_np.integers(g.n)), rng)
        before = tree.edges()
        d_expected = tree.distance(u, v)
        path = set()
        a = tree.path_to_root(u)
        b = tree.path_to_root(v)
        meet = next(x for x in a if x in set(b))
        for chain in (a[:a.index(meet) + 1], b[:b.index(meet) + 1]):
            path.update(frozenset((chain[i], chain[i + 1]))
                        for i in range(len(chain) - 1))
        d = link_cut(tree, u, v, rng)
        assert d == d_expected == len(path)
        assert tree.validate(g.insert_edge(u, v)) == 0
        assert tree.contains_edge(u, v)
        gone = before - tree.edges()
        assert len(gone) == 1
        assert frozenset(next(iter(gone))) in path
        with pytest.raises(InvalidEdgeError):
            link_cut(tree, u, v, rng)


def test_link_cut_picks_cycle_edges_uniformly():
    # C4 as a path-tree plus the closing edge: three candidate cuts
    c4 = from_edges(4, [(0, 1), (1, 2), (2, 3)])
    counts = {}
    rng = SplitMix64(21)
    for _ in range(600):
        tree = RootedTree(np.array([-1, 0, 1, 2]), 0)
        d = link_cut(tree, 0, 3, rng)
        assert d == 3
        counts[tree.edges()] = counts.get(tree.edges(), 0) + 1
        assert tree.validate(c4.insert_edge(0, 3)) == 0
    assert len(counts) == 3
    assert min(counts.values()) > 130


def test_cut_link_rewires_through_a_crossing():
    # cycle 0-1-2-3: cutting (1, 2) forces the rewire through (0, 3)
    c4 = from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    tree = RootedTree(np.array([-1, 0, 1, 2]), 0)
    d = cut_link(tree, 1, 2, c4, SplitMix64(0))
    assert d == 1
    assert tree.edges() == frozenset({(0, 1), (0, 3), (2, 3)})
    assert tree.validate(c4) == 0
    assert tree.root == 0


def test_cut_link_refuses_bridges():
    tree = bfs_tree(P3, 0)
    before = tree.parent.copy()
    with pytest.raises(ConnectivityError):
        cut_link(tree, 0, 1, P3, SplitMix64(0))
    assert np.array_equal(tree.parent, before)
    with pytest.raises(InvalidEdgeError):
        cut_link(tree, 0, 2, P3, SplitMix64(0))


def test_crossing_counts():
    tree = bfs_tree(K4, 0)          # star at 0
    assert count_cut_crossings(tree, K4, 0, 1) == 2
    assert count_cut_crossings(tree, K4, 1, 0) == 2
    with pytest.raises(InvalidEdgeError):
        count_cut_crossings(tree, K4, 1, 2)
    # oracle comparison on random instances
    rng_np = np.random.default_rng(31)
    rng = SplitMix64(31)
    for _ in range(20):
        g = checks.random_connected_graph(int(rng_np.integers(3, 12)), rng_np)
        tree, _ = wilson_tree(g, 0, rng)
        for u, v in list(tree.edges())[:8]:
            child = u if tree.parent[u] == v else v
            side = set(int(x) for x in tree.subtree_nodes(child))
            want = sum(1 for a, b in g.edges()
                       if (a in side) != (b in side)) - 1
            assert count_cut_crossings(tree, g, u, v) == want


def test_cut_link_lands_in_enumerated_neighborhood():
    rng_np = np.random.default_rng(77)
    rng = SplitMix64(77)
    for _ in range(15):
        g = checks.random_connected_graph(int(rng_np.integers(4, 9)), rng_np, 0.5)
        tree, _ = wilson_tree(g, 0, rng)
        edges = [e for e in tree.edges() if e not in bridge_edges(g)]
        if not edges:
            continue
        u, v = edges[0]
        work = tree.copy()
        d = cut_link(work, u, v, g, rng)
        assert d == count_cut_crossings(tree, g, u, v)
        assert work.validate(g) == 0
        assert not work.contains_edge(u, v)
        assert work.root == tree.root
