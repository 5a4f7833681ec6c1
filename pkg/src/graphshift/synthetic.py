"""Deterministic synthetic datasets for tests, demos, and benchmarks.

Everything here is generated locally from a seed; no downloads. The
citation surrogate mimics the shape of a small citation network (heavy-
tailed degrees, homophilous classes, sparse bag-of-words features whose
richness grows with a node's popularity). The geometric generator gives a
dense, spatially clustered graph whose features carry no class signal.
"""

from __future__ import annotations

import numpy as np
import scipy.spatial

from graphshift.graph import Graph, NodeFeatures, NodeLabels


def _proportions(num_classes: int) -> np.ndarray:
    # mildly skewed class sizes, normalized
    raw = 1.0 / np.arange(2, num_classes + 2, dtype=np.float64) ** 0.7
    return raw / raw.sum()


def _class_sizes(num_nodes: int, num_classes: int) -> np.ndarray:
    quotas = _proportions(num_classes) * num_nodes
    sizes = np.floor(quotas).astype(np.int64)
    remainder = num_nodes - sizes.sum()
    order = np.argsort(-(quotas - sizes), kind="stable")
    sizes[order[:remainder]] += 1
    return sizes


def _weighted_pick(cumulative: np.ndarray, rng: np.random.Generator) -> int:
    u = rng.random() * cumulative[-1]
    return int(np.searchsorted(cumulative, u, side="right"))


def citation_graph(
    num_nodes: int = 2995,
    num_classes: int = 7,
    feature_dim: int = 2879,
    avg_degree: float = 5.45,
    homophily: float = 0.88,
    closure_fraction: float = 0.5,
    seed: int = 7,
):
    """Citation-network surrogate: (graph, features, labels).

    Degrees follow a truncated power law; edges prefer same-class
    endpoints with probability ``homophily``. A popularity-weighted
    random spanning tree keeps the graph connected, and a triadic-closure
    phase spends ``closure_fraction`` of the non-tree edge budget closing
    wedges, giving the realistic mix of clustered cores and triangle-free
    periphery. Features are sparse binary word indicators: each word has
    a home class (plus bleed into a neighboring class), and popular nodes
    activate proportionally more words, the way well-cited papers come
    with richer metadata.
    """
    if num_nodes < num_classes:
        raise ValueError("need at least one node per class")
    if not 0.0 <= closure_fraction <= 1.0:
        raise ValueError("closure_fraction must lie in [0, 1]")
    rng = np.random.default_rng(seed)

    sizes = _class_sizes(num_nodes, num_classes)
    labels = rng.permutation(np.repeat(np.arange(num_classes), sizes))

    # a few interdisciplinary nodes cite into, and borrow words from, a
    # second field; their mixed wedges stay open under same-class closure
    is_minor = rng.random(num_nodes) < 0.08
    minor_class = labels.copy()
    minor_class[is_minor] = (
        labels[is_minor] + rng.integers(1, num_classes, int(is_minor.sum()))
    ) % num_classes

    # popularity propensities: Pareto tail, capped to keep hubs plausible
    u = rng.random(num_nodes)
    theta = np.minimum((1.0 - u) ** (-1.0 / 1.6), 40.0)

    class_nodes = [np.flatnonzero(labels == c) for c in range(num_classes)]
    cum_all = np.cumsum(theta)
    cum_hub = np.cumsum(theta**2)  # closure concentrates where hubs are
    cum_class = [np.cumsum(theta[nodes]) for nodes in class_nodes]

    edges = set()
    adjacency = [[] for _ in range(num_nodes)]

    def add_edge(a: int, b: int) -> bool:
        key = (a, b) if a < b else (b, a)
        if a == b or key in edges:
            return False
        edges.add(key)
        adjacency[a].append(b)
        adjacency[b].append(a)
        return True

    def pick_global() -> int:
        return _weighted_pick(cum_all, rng)

    def pick_same_class(c: int) -> int:
        return int(class_nodes[c][_weighted_pick(cum_class[c], rng)])

    # spanning tree over a random visiting order guarantees connectivity
    visit = rng.permutation(num_nodes)
    for t in range(1, num_nodes):
        v = int(visit[t])
        prefix = visit[:t]
        w = theta[prefix] * np.where(labels[prefix] == labels[v], 25.0, 1.0)
        cum = np.cumsum(w)
        add_edge(int(prefix[_weighted_pick(cum, rng)]), v)

    target = int(round(avg_degree * num_nodes / 2.0))
    closure_budget = int(round(max(target - len(edges), 0) * closure_fraction))
    while len(edges) < target - closure_budget:
        a = pick_global()
        if rng.random() < homophily:
            own = minor_class[a] if (is_minor[a] and rng.random() < 0.5) else labels[a]
            b = pick_same_class(int(own))
        else:
            b = pick_global()
        add_edge(a, b)

    # triadic closure: connect two neighbors of a popularity-picked center,
    # nearly always within one class so dense cores stay label-pure
    attempts_left = 60 * closure_budget
    while len(edges) < target and attempts_left > 0:
        attempts_left -= 1
        center = _weighted_pick(cum_hub, rng)
        nbrs = adjacency[center]
        if len(nbrs) < 2:
            continue
        i, j = rng.choice(len(nbrs), size=2, replace=False)
        a, b = nbrs[int(i)], nbrs[int(j)]
        if labels[a] != labels[b] and rng.random() > 0.1:
            continue
        add_edge(a, b)
    while len(edges) < target:  # pathological budgets: fill with pairing
        add_edge(pick_global(), pick_global())

    edge_array = np.asarray(sorted(edges), dtype=np.int64)
    graph = Graph.from_edges(num_nodes, edge_array)

    # word model: every word has a home class and bleeds into the next one
    home = rng.integers(0, num_classes, size=feature_dim)
    rates = np.full((num_classes, feature_dim), 0.004)
    for c in range(num_classes):
        rates[c, home == c] += 0.11
        rates[c, home == (c + 1) % num_classes] += 0.015
    # theta >= 1 by construction; normalize by its median so unpopular
    # nodes really do get sparser word vectors
    richness = np.clip((theta / 1.5) ** 0.45, 0.6, 1.8)
    class_rates = rates[labels]
    class_rates[is_minor] = 0.6 * rates[labels[is_minor]] + 0.4 * rates[minor_class[is_minor]]
    probs = class_rates * richness[:, None]
    matrix = (rng.random((num_nodes, feature_dim)) < probs).astype(np.float64)

    return (
        graph,
        NodeFeatures(matrix=matrix),
        NodeLabels(labels=labels, num_classes=num_classes),
    )


def geometric_graph(
    num_nodes: int = 1200,
    avg_degree: float = 36.0,
    num_classes: int = 5,
    feature_dim: int = 300,
    seed: int = 11,
):
    """Dense random geometric graph with uninformative features.

    Nodes are uniform points on the unit torus (periodic square, so there
    are no sparse border neighborhoods), connected within the radius that
    gives the requested expected degree. Labels are uniform and the
    features are pure Bernoulli noise, so a classifier can learn nothing
    beyond class priors.
    """
    rng = np.random.default_rng(seed)
    points = rng.random((num_nodes, 2))
    radius = float(np.sqrt(avg_degree / (np.pi * num_nodes)))
    tree = scipy.spatial.cKDTree(points, boxsize=1.0)
    pairs = tree.query_pairs(radius, output_type="ndarray")
    graph = Graph.from_edges(num_nodes, np.asarray(pairs, dtype=np.int64))
    labels = rng.integers(0, num_classes, size=num_nodes)
    matrix = (rng.random((num_nodes, feature_dim)) < 0.05).astype(np.float64)
    return (
        graph,
        NodeFeatures(matrix=matrix),
        NodeLabels(labels=labels, num_classes=num_classes),
    )


def planted_fixture(num_nodes: int = 100, num_classes: int = 3, feature_dim: int = 16, seed: int = 3):
    """Small planted-partition dataset for fast tests and golden files."""
    rng = np.random.default_rng(seed)
    sizes = _class_sizes(num_nodes, num_classes)
    labels = rng.permutation(np.repeat(np.arange(num_classes), sizes))

    iu, ju = np.triu_indices(num_nodes, k=1)
    same = labels[iu] == labels[ju]
    p = np.where(same, 0.22, 0.03)
    mask = rng.random(iu.shape[0]) < p
    edge_array = np.stack([iu[mask], ju[mask]], axis=1)

    # chain through a random node order keeps the fixture connected
    order = rng.permutation(num_nodes)
    chain = np.stack([order[:-1], order[1:]], axis=1)
    edge_array = np.concatenate([edge_array, chain], axis=0)

    graph = Graph.from_edges(num_nodes, edge_array)
    centers = rng.normal(0.0, 1.0, size=(num_classes, feature_dim))
    matrix = centers[labels] + 0.8 * rng.standard_normal((num_nodes, feature_dim))
    return (
        graph,
        NodeFeatures(matrix=matrix),
        NodeLabels(labels=labels, num_classes=num_classes),
    )


def random_graph(num_nodes: int, edge_probability: float, seed: int = 0) -> Graph:
    """Erdos-Renyi graph, for property tests."""
    rng = np.random.default_rng(seed)
    if num_nodes < 2:
        return Graph.from_edges(num_nodes, np.empty((0, 2), dtype=np.int64))
    iu, ju = np.triu_indices(num_nodes, k=1)
    mask = rng.random(iu.shape[0]) < edge_probability
    return Graph.from_edges(num_nodes, np.stack([iu[mask], ju[mask]], axis=1))
