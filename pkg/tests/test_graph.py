import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphshift.graph import (
    Graph,
    GraphFormatError,
    largest_connected_component,
    load_edge_list,
    load_features,
    load_labels,
    write_edge_list,
)
from graphshift.synthetic import random_graph


def test_from_edges_symmetrizes_and_dedupes():
    g = Graph.from_edges(3, [[0, 1], [1, 0], [0, 1], [2, 2]])
    assert g.num_edges == 1
    assert list(g.neighbors_of(0)) == [1]
    assert list(g.neighbors_of(1)) == [0]
    assert list(g.neighbors_of(2)) == []
    g.validate()


def test_load_edge_list_self_loop_extends_id_space(tmp_path):
    # a self-loop line is dropped as an edge but still claims its id
    path = tmp_path / "g.txt"
    path.write_text("0 0\n0 1\n1 0\n")
    g = load_edge_list(path)
    assert g.num_nodes == 2
    assert g.num_edges == 1
    assert list(g.degrees) == [1, 1]


def test_load_edge_list_comments_blanks_and_gaps(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("# a comment\n\n0 2\n5 2\n")
    g = load_edge_list(path)
    assert g.num_nodes == 6  # ids 1, 3, 4 exist but are isolated
    assert g.num_edges == 2
    assert list(g.degrees) == [1, 0, 2, 0, 0, 1]


@pytest.mark.parametrize(
    "content, fragment",
    [
        ("0 1 2\n", "two node ids"),
        ("0\n", "two node ids"),
        ("a b\n", "integers"),
        ("0 -1\n", "non-negative"),
    ],
)
def test_load_edge_list_parse_errors_carry_line_numbers(tmp_path, content, fragment):
    path = tmp_path / "bad.txt"
    path.write_text("0 1\n" + content)
    with pytest.raises(GraphFormatError) as err:
        load_edge_list(path)
    assert ":2:" in str(err.value)
    assert fragment in str(err.value)


def test_edge_list_round_trip(tmp_path):
    for seed in range(5):
        g = random_graph(30, 0.1, seed=seed)
        path = tmp_path / f"g{seed}.txt"
        write_edge_list(g, path)
        assert load_edge_list(path) == g


def test_edge_list_round_trip_trailing_isolated_nodes(tmp_path):
    g = Graph.from_edges(7, [[0, 1]])  # nodes 2..6 isolated
    path = tmp_path / "g.txt"
    write_edge_list(g, path)
    assert load_edge_list(path) == g


def test_empty_file_gives_empty_graph(tmp_path):
    path = tmp_path / "empty.txt"
    path.write_text("")
    g = load_edge_list(path)
    assert g.num_nodes == 0
    assert g.num_edges == 0


@settings(max_examples=50, deadline=None)
@given(
    n=st.integers(min_value=1, max_value=30),
    edges=st.lists(
        st.tuples(st.integers(0, 29), st.integers(0, 29)), max_size=120
    ),
    data=st.data(),
)
def test_construction_invariants_on_arbitrary_edge_soup(n, edges, data):
    edges = [(a % n, b % n) for a, b in edges]
    g = Graph.from_edges(n, np.asarray(edges, dtype=np.int64).reshape(-1, 2))
    g.validate()  # symmetry, sortedness, no self-loops, degree sum
    assert g.degrees.sum() == 2 * g.num_edges


def _features_csv(tmp_path, rows):
    path = tmp_path / "x.csv"
    path.write_text("".join(rows))
    return path


def test_load_features_happy_path(tmp_path):
    g = Graph.from_edges(3, [[0, 1], [1, 2]])
    path = _features_csv(tmp_path, ["1,0.5,1.0\n", "0,0.25,-2.0\n", "2,0.0,3.5\n"])
    feats = load_features(path, g)
    # rows are reordered into node-id order
    assert feats.matrix[0].tolist() == [0.25, -2.0]
    assert feats.matrix[1].tolist() == [0.5, 1.0]
    assert feats.feature_dim == 2


@pytest.mark.parametrize(
    "rows, fragment",
    [
        (["0,1.0\n", "1,2.0\n"], "expected 3 rows"),
        (["0,1.0\n", "1,2.0\n", "1,3.0\n"], "duplicate row for node 1"),
        (["0,1.0\n", "1,nan\n", "2,3.0\n"], "non-finite"),
        (["0,1.0\n", "5,2.0\n", "2,3.0\n"], "outside"),
    ],
)
def test_load_features_errors(tmp_path, rows, fragment):
    g = Graph.from_edges(3, [[0, 1], [1, 2]])
    with pytest.raises(GraphFormatError) as err:
        load_features(_features_csv(tmp_path, rows), g)
    assert fragment in str(err.value)


def test_load_labels_sparse_class_ids(tmp_path):
    g = Graph.from_edges(3, [[0, 1], [1, 2]])
    path = tmp_path / "y.csv"
    path.write_text("0,0\n1,4\n2,0\n")
    labels = load_labels(path, g)
    assert labels.num_classes == 5
    assert labels.labels.tolist() == [0, 4, 0]


def test_load_labels_negative_class_rejected(tmp_path):
    g = Graph.from_edges(2, [[0, 1]])
    path = tmp_path / "y.csv"
    path.write_text("0,0\n1,-2\n")
    with pytest.raises(GraphFormatError, match="negative class"):
        load_labels(path, g)


def test_largest_connected_component_picks_biggest():
    g = Graph.from_edges(7, [[0, 1], [2, 3], [3, 4], [4, 2], [5, 6]])
    sub, mapping = largest_connected_component(g)
    assert sub.num_nodes == 3
    assert sub.num_edges == 3
    assert mapping.tolist() == [-1, -1, 0, 1, 2, -1, -1]


def test_largest_connected_component_tie_prefers_smallest_id():
    g = Graph.from_edges(4, [[2, 3], [0, 1]])  # two components of size 2
    sub, mapping = largest_connected_component(g)
    assert mapping[0] == 0 and mapping[1] == 1
    assert mapping[2] == -1 and mapping[3] == -1
    assert sub.num_nodes == 2


def test_largest_connected_component_preserves_relative_order():
    g = Graph.from_edges(6, [[1, 3], [3, 5]])
    sub, mapping = largest_connected_component(g)
    kept = np.flatnonzero(mapping >= 0)
    assert kept.tolist() == [1, 3, 5]
    assert mapping[kept].tolist() == [0, 1, 2]
    assert sub.has_edge(0, 1) and sub.has_edge(1, 2)
