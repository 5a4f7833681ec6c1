import numpy as np
import pytest

from graphshift.graph import Graph
from graphshift.metrics import (
    ConvergenceError,
    PageRankConfig,
    bfs_distances,
    local_clustering,
    pagerank,
    personalized_pagerank,
    read_sigma_scores,
    sigma_scores,
    triangle_counts,
    UNREACHABLE,
    write_sigma_scores,
)
from graphshift.synthetic import random_graph

import oracles


def test_pagerank_uniform_on_k4(small_graphs):
    pi = pagerank(small_graphs["k4"])
    assert np.allclose(pi, 0.25, atol=1e-12)
    assert pi.sum() == pytest.approx(1.0, abs=1e-12)


def test_pagerank_matches_dense_solve_on_assorted_graphs(small_graphs):
    config = PageRankConfig()
    for name, g in small_graphs.items():
        if g.num_nodes == 0:
            continue
        expected = oracles.pagerank_dense(g, config.alpha)
        got = pagerank(g, config)
        assert np.abs(got - expected).max() < 1e-8, name


def test_pagerank_dangling_nodes_keep_total_mass(small_graphs):
    pi = pagerank(small_graphs["isolated"])
    assert pi.sum() == pytest.approx(1.0, abs=1e-10)
    expected = oracles.pagerank_dense(small_graphs["isolated"], 0.15)
    assert np.abs(pi - expected).max() < 1e-8


def test_personalized_restart_on_isolated_node_is_one_hot():
    g = Graph.from_edges(3, [[0, 1]])  # node 2 has degree zero
    pi = personalized_pagerank(g, 2)
    assert pi.tolist() == [0.0, 0.0, 1.0]


def test_personalized_pagerank_matches_dense_solve():
    g = random_graph(25, 0.15, seed=4)
    expected = oracles.pagerank_dense(g, 0.15, restart=3)
    got = personalized_pagerank(g, 3)
    assert np.abs(got - expected).max() < 1e-8


def test_pagerank_convergence_error():
    g = Graph.from_edges(5, [[i, i + 1] for i in range(4)])
    config = PageRankConfig(tolerance=1e-14, max_iterations=2)
    with pytest.raises(ConvergenceError) as err:
        pagerank(g, config)
    assert err.value.iterations == 2


def test_pagerank_invalid_config_rejected():
    with pytest.raises(ValueError):
        PageRankConfig(alpha=0.0)
    with pytest.raises(ValueError):
        PageRankConfig(alpha=1.0)
    with pytest.raises(ValueError):
        PageRankConfig(tolerance=0.0)
    with pytest.raises(ValueError):
        PageRankConfig(max_iterations=0)


def test_pagerank_deterministic_bitwise():
    g = random_graph(60, 0.1, seed=9)
    a = pagerank(g)
    b = pagerank(g)
    assert np.array_equal(a, b)


def test_clustering_known_values(small_graphs):
    assert local_clustering(small_graphs["k4"]).tolist() == [1.0] * 4
    assert local_clustering(small_graphs["path5"]).tolist() == [0.0] * 5
    assert local_clustering(small_graphs["star5"]).tolist() == [0.0] * 5
    # triangle with a pendant: node 2 has degree 3 and one closed pair
    got = local_clustering(small_graphs["triangle_pendant"])
    assert got.tolist() == [1.0, 1.0, pytest.approx(1.0 / 3.0), 0.0]


def test_clustering_matches_bruteforce(small_graphs):
    for name, g in small_graphs.items():
        expected = oracles.clustering_bruteforce(g)
        got = local_clustering(g)
        assert np.array_equal(got, expected), name


def test_triangle_counts_match_triple_enumeration():
    for seed in range(4):
        g = random_graph(30, 0.2, seed=seed)
        assert np.array_equal(triangle_counts(g), oracles.triangles_triple_loop(g))


def test_bfs_matches_floyd_warshall(small_graphs):
    for name, g in small_graphs.items():
        if g.num_nodes == 0:
            continue
        expected = oracles.floyd_warshall(g)
        for source in range(g.num_nodes):
            assert np.array_equal(bfs_distances(g, source), expected[source]), name


def test_bfs_unreachable_marker(small_graphs):
    dist = bfs_distances(small_graphs["two_components"], 0)
    assert dist.tolist() == [0, 1, 2, UNREACHABLE, UNREACHABLE, UNREACHABLE]


def test_sigma_popularity_is_negated_pagerank():
    g = random_graph(30, 0.15, seed=2)
    scores = sigma_scores(g, "popularity")
    assert np.array_equal(scores.values, -pagerank(g))
    assert scores.provenance["iterations_used"] >= 1


def test_sigma_locality_restart_is_max_pagerank_smallest_id():
    # two disjoint edges: all PageRank values tie, so the restart is node 0
    g = Graph.from_edges(4, [[0, 1], [2, 3]])
    scores = sigma_scores(g, "locality")
    assert scores.provenance["restart_node"] == 0
    assert np.array_equal(scores.values, -personalized_pagerank(g, 0))


def test_sigma_density_is_negated_clustering(small_graphs):
    g = small_graphs["triangle_pendant"]
    scores = sigma_scores(g, "density")
    assert np.array_equal(scores.values, -local_clustering(g))


def test_sigma_rejects_unknown_shift(small_graphs):
    with pytest.raises(ValueError, match="unknown shift type"):
        sigma_scores(small_graphs["k4"], "degree")


def test_sigma_order_invariant_under_monotone_transform():
    g = random_graph(40, 0.2, seed=5)
    scores = sigma_scores(g, "popularity")
    base = scores.node_order()
    stretched = type(scores)(
        shift_type="popularity", values=3.0 * scores.values + 7.0
    )
    assert np.array_equal(base, stretched.node_order())


def test_sigma_ties_break_by_node_id():
    g = Graph.from_edges(4, [[0, 1], [1, 2], [2, 3]])  # path: clustering all zero
    scores = sigma_scores(g, "density")
    assert scores.node_order().tolist() == [0, 1, 2, 3]


def test_sigma_csv_round_trip_is_exact(tmp_path):
    g = random_graph(25, 0.2, seed=8)
    scores = sigma_scores(g, "locality")
    path = tmp_path / "sigma.csv"
    write_sigma_scores(scores, path, config_hash="abc123")
    loaded = read_sigma_scores(path)
    assert loaded.shift_type == "locality"
    assert np.array_equal(loaded.values, scores.values)
    assert loaded.provenance == scores.provenance
    lines = path.read_text().splitlines()
    assert lines[0] == "# config_hash=abc123"
    node, value, shift = lines[1].split(",")
    assert node == "0" and shift == "locality"
    assert float(value) == scores.values[0]


def test_sigma_csv_rejects_malformed_rows(tmp_path):
    path = tmp_path / "sigma.csv"
    path.write_text("0,1.5\n")
    with pytest.raises(ValueError, match="node_id,sigma,shift_type"):
        read_sigma_scores(path)
    path.write_text("0,1.5,popularity\n1,2.0,density\n")
    with pytest.raises(ValueError, match="mixed shift types"):
        read_sigma_scores(path)
    path.write_text("# config_hash=x\n")
    with pytest.raises(ValueError, match="no score rows"):
        read_sigma_scores(path)
