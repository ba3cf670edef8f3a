"""Edge-list parsing and the CSR graph value type."""

import numpy as np
import pytest

from kemeny import checks
from kemeny.errors import (ConnectivityError, EmptyGraphError,
                           InvalidEdgeError, ParseError)
from kemeny.graph import (Graph, bridge_edges, eccentricity_from, from_edges,
                          is_connected, largest_connected_component,
                          parse_edge_list, to_edge_list_text)

TRIANGLE = "0 1\n1 2\n2 0\n"


def csr_is_well_formed(g: Graph) -> bool:
    if g.indptr[0] != 0 or g.indptr[-1] != g.indices.size:
        return False
    for v in range(g.n):
        row = g.neighbors(v)
        if row.size and (np.any(np.diff(row) <= 0) or np.any(row == v)):
            return False
        for w in row:
            if not g.has_edge(int(w), v):
                return False
    return True


def test_parse_triangle():
    g = parse_edge_list(TRIANGLE)
    assert (g.n, g.m, g.two_m) == (3, 3, 6)
    assert csr_is_well_formed(g)
    assert sorted(g.edges()) == [(0, 1), (0, 2), (1, 2)]


def test_parse_comments_blanks_and_negative_ids():
    text = "# header\n\n10 -3   # trailing\n   \n-3 4\n4 10\n"
    g = parse_edge_list(text)
    # ids remap ascending: -3 -> 0, 4 -> 1, 10 -> 2
    assert g.n == 3
    assert list(g.labels) == [-3, 4, 10]
    assert sorted(g.edges()) == [(0, 1), (0, 2), (1, 2)]


def test_parse_drops_loops_and_duplicates():
    g = parse_edge_list("0 0\n0 1\n1 0\n0 1\n1 2\n")
    assert g.m == 2
    assert not g.has_edge(0, 0)


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ParseError) as info:
        parse_edge_list("0 1\n1 2 3\n")
    assert info.value.line_no == 2
    with pytest.raises(ParseError) as info:
        parse_edge_list("0 1\n\nx 2\n")
    assert info.value.line_no == 3
    with pytest.raises(EmptyGraphError):
        parse_edge_list("# nothing\n3 3\n")


def test_parse_accepts_file_objects(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text(TRIANGLE)
    with open(path) as fh:
        g = parse_edge_list(fh)
    assert g.m == 3


def test_from_edges_validation():
    with pytest.raises(EmptyGraphError):
        from_edges(0, [])
    with pytest.raises(InvalidEdgeError):
        from_edges(3, [(0, 3)])
    with pytest.raises(InvalidEdgeError):
        from_edges(3, [(1, 1)])
    with pytest.raises(InvalidEdgeError):
        from_edges(3, [(0, 1), (1, 0)])


def test_insert_edge_is_a_value_operation():
    g = parse_edge_list("0 1\n1 2\n")
    g2 = g.insert_edge(0, 2)
    assert g2.has_edge(0, 2) and g2.has_edge(2, 0)
    assert not g.has_edge(0, 2)          # original untouched
    assert (g.m, g2.m) == (2, 3)
    assert csr_is_well_formed(g2)
    with pytest.raises(InvalidEdgeError):
        g2.insert_edge(0, 2)
    with pytest.raises(InvalidEdgeError):
        g.insert_edge(1, 1)
    with pytest.raises(InvalidEdgeError):
        g.insert_edge(0, 5)


def test_delete_edge_is_a_value_operation():
    g = parse_edge_list(TRIANGLE)
    g2 = g.delete_edge(2, 0)
    assert g.has_edge(0, 2)
    assert not g2.has_edge(0, 2)
    assert csr_is_well_formed(g2)
    with pytest.raises(InvalidEdgeError):
        g2.delete_edge(0, 2)
    assert g2.insert_edge(0, 2) == g


def test_insert_delete_round_trip_on_random_graphs():
    rng = np.random.default_rng(11)
    for _ in range(20)[:20]:
        g = checks.random_connected_graph(rng.integers(3, 12), rng)
        non = checks.non_edges(g)
        if not non:
            continue
        u, v = non[rng.integers(len(non))]
        assert g.insert_edge(u, v).delete_edge(u, v) == g
        assert csr_is_well_formed(g.insert_edge(u, v))


def test_largest_component_and_tie_break():
    # components {0,1,2} and {3,4,5}: equal sizes, keep smallest original id
    g = parse_edge_list("0 1\n1 2\n3 4\n4 5\n")
    sub, mapping = largest_connected_component(g)
    assert sub.n == 3
    assert list(sub.labels) == [0, 1, 2]
    assert list(mapping) == [0, 1, 2, -1, -1, -1]
    # strictly larger component wins regardless of ids
    g = parse_edge_list("7 8\n0 1\n1 2\n2 0\n")
    sub, mapping = largest_connected_component(g)
    assert sub.n == 3
    assert mapping[g.n - 1] == -1 or sub.n == 3


def test_connectivity_and_eccentricity():
    path4 = parse_edge_list("0 1\n1 2\n2 3\n")
    assert is_connected(path4)
    assert eccentricity_from(path4, 0) == 3
    assert eccentricity_from(path4, 1) == 2
    split = parse_edge_list("0 1\n2 3\n")
    assert not is_connected(split)
    with pytest.raises(ConnectivityError):
        eccentricity_from(split, 0)


def test_bridges():
    # triangle with a pendant path: only the path edges are bridges
    g = parse_edge_list("0 1\n1 2\n2 0\n2 3\n3 4\n")
    assert bridge_edges(g) == {(2, 3), (3, 4)}
    assert bridge_edges(parse_edge_list(TRIANGLE)) == set()
    tree = parse_edge_list("0 1\n1 2\n1 3\n")
    assert bridge_edges(tree) == {(0, 1), (1, 2), (1, 3)}


def test_edge_list_round_trip_preserves_labels():
    text = "5 9\n9 12\n12 5\n"
    g = parse_edge_list(text)
    again = parse_edge_list(to_edge_list_text(g))
    assert again == g
    assert list(again.labels) == list(g.labels)


def test_equality_ignores_labels():
    a = from_edges(2, [(0, 1)], labels=np.array([10, 20]))
    b = from_edges(2, [(0, 1)])
    assert a == b
    assert a != from_edges(3, [(0, 1)])
