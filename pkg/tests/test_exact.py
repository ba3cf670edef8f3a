"""Closed-form mean hitting values, resistances, tree counts, and the
two-forest identities, pinned against hand-derived small cases."""

import math

import numpy as np
import pytest

from kemeny import checks
from kemeny.errors import (CapacityError, ConnectivityError, ConvergenceError,
                           EmptyGraphError, InvalidEdgeError,
                           InvalidPathError)
from kemeny.exact import (TwoForest, all_two_forests, count_spanning_trees,
                          effective_resistance_exact,
                          effective_resistance_iterative,
                          enumerate_spanning_trees, enumerate_two_forests,
                          kemeny_eigen, kemeny_forest_formula,
                          path_mapping_sets, spectrum)
from kemeny.graph import from_edges, parse_edge_list
from kemeny.spanning import RootedTree

K2 = from_edges(2, [(0, 1)])
K3 = from_edges(3, [(0, 1), (0, 2), (1, 2)])
P3 = from_edges(3, [(0, 1), (1, 2)])
K4 = from_edges(4, [(a, b) for a in range(4) for b in range(a + 1, 4)])
C4 = from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
STAR4 = from_edges(4, [(0, 1), (0, 2), (0, 3)])


# -- eigenvalue route --------------------------------------------------------

def test_known_mean_hitting_values():
    # clique on 3: eigenvalues 0, 3/2, 3/2 -> 2/3 + 2/3
    assert kemeny_eigen(K3) == pytest.approx(4.0 / 3.0, abs=1e-12)
    # 3-node path: eigenvalues 0, 1, 2
    assert kemeny_eigen(P3) == pytest.approx(1.5, abs=1e-12)
    assert kemeny_eigen(K2) == pytest.approx(0.5, abs=1e-12)
    # 4-star and 4-cycle both have eigenvalues 0, 1, 1, 2
    assert kemeny_eigen(STAR4) == pytest.approx(2.5, abs=1e-12)
    assert kemeny_eigen(C4) == pytest.approx(2.5, abs=1e-12)


def test_spectrum_shape_and_null_value():
    eig = spectrum(K4)
    assert eig.shape == (4,)
    assert abs(eig[0]) < 1e-10
    assert np.all(np.diff(eig) >= -1e-12)
    assert np.sum(eig) == pytest.approx(4.0)


def test_eigen_route_rejects_disconnected_and_empty():
    with pytest.raises(ConnectivityError):
        kemeny_eigen(parse_edge_list("0 1\n2 3\n"))
    with pytest.raises(EmptyGraphError):
        kemeny_eigen(from_edges(3, []))


# -- effective resistance ----------------------------------------------------

def test_resistance_small_cases():
    assert effective_resistance_exact(K3, 0, 1) == pytest.approx(2 / 3, abs=1e-12)
    assert effective_resistance_exact(P3, 0, 2) == pytest.approx(2.0, abs=1e-12)
    assert effective_resistance_exact(K4, 2, 3) == pytest.approx(0.5, abs=1e-12)
    assert effective_resistance_exact(C4, 0, 2) == pytest.approx(1.0, abs=1e-12)


def test_iterative_resistance_matches_exact():
    rng = np.random.default_rng(5)
    for _ in range(15):
        g = checks.random_connected_graph(int(rng.integers(2, 20)), rng)
        u = int(rng.integers(g.n))
        v = (u + 1 + int(rng.integers(g.n - 1))) % g.n if g.n > 1 else 0
        want = effective_resistance_exact(g, u, v)
        got = effective_resistance_iterative(g, u, v, rel_tol=1e-10)
        assert got == pytest.approx(want, abs=1e-8)


def test_resistance_validates_endpoints():
    with pytest.raises(InvalidEdgeError):
        effective_resistance_exact(K3, 1, 1)
    with pytest.raises(InvalidEdgeError):
        effective_resistance_iterative(K3, 1, 1)
    with pytest.raises(ConnectivityError):
        effective_resistance_iterative(parse_edge_list("0 1\n2 3\n"), 0, 2)


def test_iterative_resistance_iteration_cap():
    g = checks.random_connected_graph(30, np.random.default_rng(0))
    with pytest.raises(ConvergenceError):
        effective_resistance_iterative(g, 0, 1, rel_tol=1e-12, max_iter=1)


# -- spanning tree counts and enumeration ------------------------------------

def test_tree_counts():
    assert count_spanning_trees(K3) == 3
    assert count_spanning_trees(P3) == 1
    assert count_spanning_trees(K4) == 16
    k5 = from_edges(5, [(a, b) for a in range(5) for b in range(a + 1, 5)])
    assert count_spanning_trees(k5) == 125
    c5 = from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)])
    assert count_spanning_trees(c5) == 5


def test_tree_count_float_path_is_exact_on_integer_counts():
    # 70 nodes exceeds the exact-arithmetic cutoff; the float route must
    # still return the integer count for a 70-cycle
    edges = [(i, (i + 1) % 70) for i in range(70)]
    assert count_spanning_trees(from_edges(70, edges)) == 70


def test_tree_count_capacity_guard():
    n = 501
    path = from_edges(n, [(i, i + 1) for i in range(n - 1)])
    with pytest.raises(CapacityError):
        count_spanning_trees(path)


def test_enumeration_matches_counts():
    rng = np.random.default_rng(9)
    for _ in range(12):
        g = checks.random_connected_graph(int(rng.integers(2, 8)), rng, 0.5)
        root = int(rng.integers(g.n))
        trees = enumerate_spanning_trees(g, root)
        assert len(trees) == count_spanning_trees(g)
        assert len({t.edges() for t in trees}) == len(trees)
        for t in trees:
            assert t.root == root
            assert t.validate(g) == 0


def test_enumeration_capacity_guard():
    k12 = from_edges(12, [(a, b) for a in range(12) for b in range(a + 1, 12)])
    with pytest.raises(CapacityError):
        enumerate_spanning_trees(k12)  # 12^10 trees


# -- spanning 2-forests ------------------------------------------------------

def test_two_forests_of_triangle():
    forests = all_two_forests(K3, root=0)
    # one surviving edge each: three ways to keep one edge of the triangle
    assert len(forests) == 3
    for f in forests:
        assert len(f.edges) == 1
        assert f.root_side | f.cut_side == {0, 1, 2}
        assert not f.root_side & f.cut_side
        assert 0 in f.root_side
    separating = enumerate_two_forests(K3, root=0, u=1)
    assert {f.edges for f in separating} == \
        {frozenset({(0, 2)}), frozenset({(1, 2)})}
    with pytest.raises(InvalidEdgeError):
        enumerate_two_forests(K3, 0, 0)


def test_two_forest_volumes():
    f = TwoForest(root_side=frozenset({0}), cut_side=frozenset({1, 2}),
                  edges=frozenset({(1, 2)}))
    assert f.root_volume(K3) == 2


def test_forest_count_is_root_independent():
    for g in (K4, C4, STAR4):
        sizes = {len(all_two_forests(g, r)) for r in range(g.n)}
        assert len(sizes) == 1


def test_forest_formula_on_known_values():
    assert kemeny_forest_formula(K3) == pytest.approx(4 / 3, abs=1e-12)
    assert kemeny_forest_formula(P3) == pytest.approx(1.5, abs=1e-12)
    assert kemeny_forest_formula(C4) == pytest.approx(2.5, abs=1e-12)


def test_forest_formula_matches_eigen_on_random_graphs():
    rng = np.random.default_rng(23)
    for _ in range(10):
        g = checks.random_connected_graph(int(rng.integers(2, 7)), rng, 0.6)
        assert kemeny_forest_formula(g, root=int(rng.integers(g.n))) == \
            pytest.approx(kemeny_eigen(g), abs=1e-8)


# -- path mapping ------------------------------------------------------------

def test_path_mapping_hand_case():
    # tree 1->3->2->0 on the clique; walk path 1,2,3,0. Only the step
    # (2,3) matches, in reverse, cutting tree edge (2,3): start 1 sits
    # under 3, so the forest separates {1,3} from {0,2}.
    tree = RootedTree(np.array([-1, 3, 0, 2]), root=0)
    fwd, rev = path_mapping_sets(tree, [1, 2, 3, 0], K4)
    assert fwd == []
    assert len(rev) == 1
    assert rev[0].cut_side == frozenset({1, 3})
    assert rev[0].root_side == frozenset({0, 2})
    assert rev[0].edges == frozenset({(1, 3), (0, 2)})


def test_path_mapping_forward_case():
    # same tree, path following the tree spine: every step matches forward
    tree = RootedTree(np.array([-1, 3, 0, 2]), root=0)
    fwd, rev = path_mapping_sets(tree, [1, 3, 2, 0], K4)
    assert rev == []
    assert [f.cut_side for f in fwd] == \
        [frozenset({1}), frozenset({1, 3}), frozenset({1, 2, 3})]


def test_path_mapping_rejects_bad_paths():
    tree = RootedTree(np.array([-1, 0, 0, 1]), root=0)
    with pytest.raises(InvalidPathError):
        path_mapping_sets(tree, [1], K4)
    with pytest.raises(InvalidPathError):
        path_mapping_sets(tree, [1, 2, 1, 0], K4)
    with pytest.raises(InvalidPathError):
        path_mapping_sets(tree, [1, 2, 3], K4)          # ends off-root
    with pytest.raises(InvalidPathError):
        path_mapping_sets(tree, [1, 3, 0], C4)          # (1,3) off-graph


def test_path_mapping_multiset_identity_spot():
    # net forward-minus-reverse over all trees covers each separating
    # forest exactly once; raises on any miscount
    assert checks.check_path_mapping(K4) > 0
    assert checks.check_path_mapping(C4) > 0
