import numpy as np
import pytest

from graphshift.graph import Graph, write_edge_list
from graphshift.synthetic import planted_fixture, random_graph


@pytest.fixture(scope="session")
def fixture_dataset():
    """The 100-node planted-partition dataset used across the suite."""
    return planted_fixture()


@pytest.fixture
def small_graphs():
    """A spread of named edge cases plus a few random graphs."""
    graphs = {
        "k4": Graph.from_edges(4, [[a, b] for a in range(4) for b in range(a + 1, 4)]),
        "path5": Graph.from_edges(5, [[i, i + 1] for i in range(4)]),
        "star5": Graph.from_edges(5, [[0, i] for i in range(1, 5)]),
        "triangle_pendant": Graph.from_edges(4, [[0, 1], [0, 2], [1, 2], [2, 3]]),
        "isolated": Graph.from_edges(3, [[0, 1]]),
        "empty": Graph.from_edges(4, np.empty((0, 2), dtype=np.int64)),
        "two_components": Graph.from_edges(6, [[0, 1], [1, 2], [3, 4], [4, 5]]),
    }
    for seed in range(3):
        graphs[f"random_{seed}"] = random_graph(20 + 7 * seed, 0.15, seed=seed)
    return graphs


def write_dataset(directory, graph, features, labels):
    """Materialize a dataset in the text formats the CLI reads."""
    edges_path = directory / "edges.txt"
    features_path = directory / "features.csv"
    labels_path = directory / "labels.csv"
    write_edge_list(graph, edges_path)
    with open(features_path, "w", encoding="utf-8", newline="\n") as fh:
        for node in range(features.num_nodes):
            row = ",".join(repr(float(v)) for v in features.matrix[node])
            fh.write(f"{node},{row}\n")
    with open(labels_path, "w", encoding="utf-8", newline="\n") as fh:
        for node in range(labels.num_nodes):
            fh.write(f"{node},{labels.labels[node]}\n")
    return edges_path, features_path, labels_path
