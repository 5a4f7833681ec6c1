"""Undirected graph container and dataset ingestion.

The graph is stored in compressed sparse row form: ``offsets`` has length
``num_nodes + 1`` and ``neighbors[offsets[i]:offsets[i+1]]`` is the sorted
adjacency list of node ``i``. Graphs are simple (no self-loops, no parallel
edges) and symmetric; loaders enforce this at construction time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse


class GraphFormatError(ValueError):
    """Raised when an input file violates the documented text formats."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple undirected graph in CSR form.

    Attributes
    ----------
    num_nodes : int
        Number of nodes; ids are dense ``0..num_nodes-1``.
    offsets : ndarray of int64, shape (num_nodes + 1,)
        CSR row pointers into ``neighbors``.
    neighbors : ndarray of int64
        Concatenated adjacency lists, strictly increasing within each row.
    """

    num_nodes: int
    offsets: np.ndarray
    neighbors: np.ndarray
    degrees: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "degrees", np.diff(self.offsets))

    @property
    def num_edges(self) -> int:
        """Number of undirected edges."""
        return self.neighbors.shape[0] // 2

    def neighbors_of(self, node: int) -> np.ndarray:
        return self.neighbors[self.offsets[node] : self.offsets[node + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors_of(u)
        k = np.searchsorted(row, v)
        return k < row.shape[0] and row[k] == v

    def to_scipy(self) -> scipy.sparse.csr_matrix:
        """Zero-copy view as a scipy CSR matrix with unit weights."""
        data = np.ones(self.neighbors.shape[0], dtype=np.float64)
        return scipy.sparse.csr_matrix(
            (data, self.neighbors, self.offsets),
            shape=(self.num_nodes, self.num_nodes),
        )

    def validate(self) -> None:
        """Full-scan structural check; raises ValueError on violation."""
        n = self.num_nodes
        if self.offsets.shape != (n + 1,):
            raise ValueError("offsets must have length num_nodes + 1")
        if self.offsets[0] != 0 or self.offsets[-1] != self.neighbors.shape[0]:
            raise ValueError("offsets do not span the neighbor array")
        if np.any(np.diff(self.offsets) < 0):
            raise ValueError("offsets must be non-decreasing")
        if self.neighbors.shape[0] and (
            self.neighbors.min() < 0 or self.neighbors.max() >= n
        ):
            raise ValueError("neighbor id out of range")
        for i in range(n):
            row = self.neighbors_of(i)
            if row.shape[0]:
                if np.any(np.diff(row) <= 0):
                    raise ValueError(f"adjacency list of node {i} not strictly increasing")
                if np.any(row == i):
                    raise ValueError(f"self-loop at node {i}")
        # symmetry: every (i, j) entry has a (j, i) partner
        src = np.repeat(np.arange(n), self.degrees)
        order = np.lexsort((src, self.neighbors))
        if not (
            np.array_equal(self.neighbors[order], src)
            and np.array_equal(src[order], self.neighbors)
        ):
            raise ValueError("adjacency is not symmetric")
        if self.degrees.sum() != 2 * self.num_edges:
            raise ValueError("degree sum does not equal twice the edge count")

    @classmethod
    def from_edges(cls, num_nodes: int, edges: np.ndarray) -> "Graph":
        """Build a graph from an (m, 2) array of node-id pairs.

        Self-loops and duplicate edges (in either direction) are dropped.
        """
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.shape[0]:
            if edges.min() < 0 or edges.max() >= num_nodes:
                raise ValueError("edge endpoint out of range")
            edges = edges[edges[:, 0] != edges[:, 1]]
        if edges.shape[0]:
            lo = np.minimum(edges[:, 0], edges[:, 1])
            hi = np.maximum(edges[:, 0], edges[:, 1])
            und = np.unique(np.stack([lo, hi], axis=1), axis=0)
            both = np.concatenate([und, und[:, ::-1]], axis=0)
            order = np.lexsort((both[:, 1], both[:, 0]))
            src = both[order, 0]
            dst = both[order, 1]
        else:
            src = np.empty(0, dtype=np.int64)
            dst = np.empty(0, dtype=np.int64)
        counts = np.bincount(src, minlength=num_nodes)
        offsets = np.zeros(num_nodes + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        return cls(num_nodes=num_nodes, offsets=offsets, neighbors=dst)

    def edge_array(self) -> np.ndarray:
        """All undirected edges as an (m, 2) array with u < v, lexicographic."""
        src = np.repeat(np.arange(self.num_nodes), self.degrees)
        mask = src < self.neighbors
        return np.stack([src[mask], self.neighbors[mask]], axis=1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.num_nodes == other.num_nodes
            and np.array_equal(self.offsets, other.offsets)
            and np.array_equal(self.neighbors, other.neighbors)
        )


@dataclass(frozen=True, eq=False)
class NodeFeatures:
    """Dense per-node feature matrix, row i belongs to node i."""

    matrix: np.ndarray

    @property
    def num_nodes(self) -> int:
        return self.matrix.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True, eq=False)
class NodeLabels:
    """Per-node integer class ids in ``[0, num_classes)``."""

    labels: np.ndarray
    num_classes: int

    @property
    def num_nodes(self) -> int:
        return self.labels.shape[0]


def load_edge_list(path, directed_input: bool = False) -> Graph:
    """Load an undirected graph from a whitespace-separated edge list.

    Each non-comment line holds two non-negative integer node ids
    ``u v``. Lines starting with ``#`` and blank lines are ignored. The
    input is symmetrized, then self-loops and duplicate edges are dropped,
    so directed and undirected inputs produce the same simple graph
    (``directed_input`` is accepted for caller-side explicitness and does
    not change the result). The node id space is ``0..max_id`` inclusive;
    ids never mentioned stay as isolated nodes.
    """
    del directed_input  # symmetrization makes both input kinds equivalent
    sources = []
    targets = []
    max_id = -1
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) != 2:
                raise GraphFormatError(
                    f"{path}:{lineno}: expected two node ids, got {len(parts)} fields"
                )
            try:
                u = int(parts[0])
                v = int(parts[1])
            except ValueError:
                raise GraphFormatError(
                    f"{path}:{lineno}: node ids must be integers"
                ) from None
            if u < 0 or v < 0:
                raise GraphFormatError(f"{path}:{lineno}: node ids must be non-negative")
            if u > np.iinfo(np.int64).max or v > np.iinfo(np.int64).max:
                raise GraphFormatError(f"{path}:{lineno}: node id overflows index type")
            sources.append(u)
            targets.append(v)
            if u > max_id:
                max_id = u
            if v > max_id:
                max_id = v
    num_nodes = max_id + 1
    edges = np.stack(
        [np.asarray(sources, dtype=np.int64), np.asarray(targets, dtype=np.int64)],
        axis=1,
    ) if sources else np.empty((0, 2), dtype=np.int64)
    return Graph.from_edges(num_nodes, edges)


def write_edge_list(graph: Graph, path) -> None:
    """Write a graph in the edge-list format accepted by `load_edge_list`.

    Edges are emitted once with ``u < v`` in lexicographic order. If the
    largest node id carries no edge, a trailing self-loop line pins the id
    space (self-loops are dropped on load but still extend the id range),
    so a write/load round trip reproduces the graph exactly.
    """
    edges = graph.edge_array()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for u, v in edges:
            fh.write(f"{u} {v}\n")
        last = graph.num_nodes - 1
        if graph.num_nodes and (edges.shape[0] == 0 or edges.max() < last):
            fh.write(f"{last} {last}\n")


def _load_numeric_csv(path, expected_cols=None) -> np.ndarray:
    try:
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2, dtype=np.float64)
    except ValueError as exc:
        raise GraphFormatError(f"{path}: malformed CSV ({exc})") from None
    if data.size == 0:
        raise GraphFormatError(f"{path}: file holds no data rows")
    if expected_cols is not None and data.shape[1] != expected_cols:
        raise GraphFormatError(
            f"{path}: expected {expected_cols} columns, found {data.shape[1]}"
        )
    return data


def _check_node_column(col: np.ndarray, num_nodes: int, path) -> np.ndarray:
    ids = col.astype(np.int64)
    if np.any(ids != col):
        raise GraphFormatError(f"{path}: node ids must be integers")
    if ids.min() < 0 or ids.max() >= num_nodes:
        raise GraphFormatError(
            f"{path}: node id {ids[np.argmax((ids < 0) | (ids >= num_nodes))]} "
            f"outside 0..{num_nodes - 1}"
        )
    unique_ids, counts = np.unique(ids, return_counts=True)
    if np.any(counts > 1):
        dup = int(unique_ids[np.argmax(counts > 1)])
        raise GraphFormatError(f"{path}: duplicate row for node {dup}")
    if ids.shape[0] != num_nodes:
        raise GraphFormatError(
            f"{path}: expected {num_nodes} rows, found {ids.shape[0]}"
        )
    return ids


def load_features(path, graph: Graph) -> NodeFeatures:
    """Load dense node features from a headerless CSV.

    Each row is ``node_id, v_1, ..., v_f``; every node of ``graph`` must
    appear exactly once. Values must be finite.
    """
    data = _load_numeric_csv(path)
    if data.shape[1] < 2:
        raise GraphFormatError(f"{path}: feature rows need at least one value column")
    ids = _check_node_column(data[:, 0], graph.num_nodes, path)
    values = data[:, 1:]
    if not np.isfinite(values).all():
        raise GraphFormatError(f"{path}: non-finite feature value")
    matrix = np.empty_like(values)
    matrix[ids] = values
    return NodeFeatures(matrix=matrix)


def load_labels(path, graph: Graph) -> NodeLabels:
    """Load per-node class ids from a headerless CSV ``node_id, class_id``.

    ``num_classes`` is ``max class id + 1``; class ids may be sparse.
    """
    data = _load_numeric_csv(path, expected_cols=2)
    ids = _check_node_column(data[:, 0], graph.num_nodes, path)
    raw = data[:, 1]
    classes = raw.astype(np.int64)
    if np.any(classes != raw):
        raise GraphFormatError(f"{path}: class ids must be integers")
    if classes.min() < 0:
        raise GraphFormatError(f"{path}: negative class id")
    labels = np.empty(graph.num_nodes, dtype=np.int64)
    labels[ids] = classes
    return NodeLabels(labels=labels, num_classes=int(labels.max()) + 1)


def largest_connected_component(graph: Graph):
    """Extract the largest connected component with compacted node ids.

    Components are compared by node count; ties go to the component
    containing the smallest original node id. Returns ``(subgraph,
    mapping)`` where ``mapping[old_id]`` is the new dense id or ``-1`` for
    removed nodes. New ids preserve the relative order of the original ids.
    """
    n = graph.num_nodes
    if n == 0:
        raise ValueError("cannot take the largest component of an empty graph")
    comp = np.full(n, -1, dtype=np.int64)
    n_comp = 0
    for seed in range(n):
        if comp[seed] >= 0:
            continue
        comp[seed] = n_comp
        frontier = np.array([seed], dtype=np.int64)
        while frontier.size:
            nxt = _gather_neighbors(graph, frontier)
            nxt = nxt[comp[nxt] < 0]
            if nxt.size:
                nxt = np.unique(nxt)
                comp[nxt] = n_comp
            frontier = nxt
        n_comp += 1
    sizes = np.bincount(comp, minlength=n_comp)
    best = int(np.argmax(sizes))  # first max: component with smallest seed id
    old_ids = np.flatnonzero(comp == best)
    mapping = np.full(n, -1, dtype=np.int64)
    mapping[old_ids] = np.arange(old_ids.shape[0])
    edges = graph.edge_array()
    if edges.shape[0]:
        keep = (mapping[edges[:, 0]] >= 0) & (mapping[edges[:, 1]] >= 0)
        new_edges = mapping[edges[keep]]
    else:
        new_edges = edges
    sub = Graph.from_edges(old_ids.shape[0], new_edges)
    return sub, mapping


def _gather_neighbors(graph: Graph, nodes: np.ndarray) -> np.ndarray:
    """Concatenated neighbor lists of ``nodes`` (with multiplicity)."""
    lens = graph.degrees[nodes]
    total = int(lens.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    starts = graph.offsets[nodes]
    local = np.concatenate(([0], np.cumsum(lens)[:-1]))
    idx = np.arange(total, dtype=np.int64) - np.repeat(local, lens) + np.repeat(starts, lens)
    return graph.neighbors[idx]
