"""Structural node scores: PageRank, clustering, BFS distances, sigma.

All computations run in 64-bit floats with sequential, deterministic
accumulation, so repeated runs on the same input are bit-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from graphshift.graph import Graph, _gather_neighbors

#: Marker for nodes with no path from the BFS source.
UNREACHABLE = -1

SHIFT_TYPES = ("popularity", "locality", "density")


class ConvergenceError(RuntimeError):
    """Power iteration failed to reach tolerance within the iteration cap."""

    def __init__(self, iterations: int, residual: float):
        super().__init__(
            f"no convergence after {iterations} iterations "
            f"(last L1 residual {residual:.3e})"
        )
        self.iterations = iterations
        self.residual = residual


@dataclass(frozen=True)
class PageRankConfig:
    """Power-iteration settings.

    ``alpha`` is the restart probability: at each step the walker teleports
    to the restart distribution with probability ``alpha`` and follows a
    uniformly random edge otherwise. ``restart_node=None`` selects the
    uniform restart distribution; a node id selects a one-hot restart
    (personalized PageRank).
    """

    alpha: float = 0.15
    tolerance: float = 1e-10
    max_iterations: int = 1000
    restart_node: Optional[int] = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.tolerance <= 0.0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


def _restart_distribution(graph: Graph, config: PageRankConfig) -> np.ndarray:
    n = graph.num_nodes
    if config.restart_node is None:
        return np.full(n, 1.0 / n, dtype=np.float64)
    j = config.restart_node
    if not 0 <= j < n:
        raise ValueError(f"restart node {j} outside 0..{n - 1}")
    p = np.zeros(n, dtype=np.float64)
    p[j] = 1.0
    return p


def _power_iteration(graph: Graph, config: PageRankConfig):
    """Run power iteration; returns (pi, iterations, final residual).

    Update rule: ``pi <- (1 - alpha) * (A D^-1 pi + dangling_mass * p)
    + alpha * p``. Mass sitting on degree-zero nodes is redistributed to
    the restart distribution each step, so ``pi`` stays a distribution.
    """
    n = graph.num_nodes
    if n == 0:
        raise ValueError("PageRank is undefined on an empty graph")
    p = _restart_distribution(graph, config)
    deg = graph.degrees.astype(np.float64)
    dangling = graph.degrees == 0
    inv_deg = np.zeros(n, dtype=np.float64)
    np.divide(1.0, deg, out=inv_deg, where=deg > 0)
    adj = graph.to_scipy()
    alpha = config.alpha
    pi = p.copy()
    for iteration in range(1, config.max_iterations + 1):
        spread = adj.dot(pi * inv_deg)
        dangling_mass = float(pi[dangling].sum())
        new_pi = (1.0 - alpha) * (spread + dangling_mass * p) + alpha * p
        residual = float(np.abs(new_pi - pi).sum())
        pi = new_pi
        if residual < config.tolerance:
            return pi, iteration, residual
    raise ConvergenceError(config.max_iterations, residual)


def pagerank(graph: Graph, config: PageRankConfig = PageRankConfig()) -> np.ndarray:
    """PageRank distribution under ``config``; see `PageRankConfig`."""
    pi, _, _ = _power_iteration(graph, config)
    return pi


def personalized_pagerank(
    graph: Graph,
    restart_node: int,
    alpha: float = 0.15,
    tolerance: float = 1e-10,
    max_iterations: int = 1000,
) -> np.ndarray:
    """PageRank with a one-hot restart distribution at ``restart_node``."""
    config = PageRankConfig(
        alpha=alpha,
        tolerance=tolerance,
        max_iterations=max_iterations,
        restart_node=restart_node,
    )
    pi, _, _ = _power_iteration(graph, config)
    return pi


def triangle_counts(graph: Graph) -> np.ndarray:
    """Number of triangles through each node.

    For every undirected edge (i, j) the common neighbors are found by
    binary search of the shorter sorted adjacency list in the longer one;
    each triangle {i, j, k} is then seen once per corner-adjacent edge
    pair, so the per-node edge sums are exactly twice the triangle counts.
    """
    n = graph.num_nodes
    acc = np.zeros(n, dtype=np.int64)
    for i in range(n):
        row_i = graph.neighbors_of(i)
        for j in row_i[np.searchsorted(row_i, i + 1) :]:
            row_j = graph.neighbors_of(j)
            short, long_ = (row_i, row_j) if row_i.shape[0] <= row_j.shape[0] else (row_j, row_i)
            pos = np.searchsorted(long_, short)
            pos[pos == long_.shape[0]] = long_.shape[0] - 1
            common = int(np.count_nonzero(long_[pos] == short))
            acc[i] += common
            acc[j] += common
    if np.any(acc % 2):
        raise AssertionError("edge-wise common-neighbor sums must be even")
    return acc // 2


def local_clustering(graph: Graph) -> np.ndarray:
    """Local clustering coefficient per node.

    ``c_i = 2 * t_i / (d_i * (d_i - 1))`` with ``t_i`` the number of
    triangles through ``i``; nodes of degree below two get ``c_i = 0``.
    """
    tri = triangle_counts(graph).astype(np.float64)
    deg = graph.degrees.astype(np.float64)
    denom = deg * (deg - 1.0)
    out = np.zeros(graph.num_nodes, dtype=np.float64)
    np.divide(2.0 * tri, denom, out=out, where=denom > 0)
    return out


def bfs_distances(graph: Graph, source: int) -> np.ndarray:
    """Unweighted shortest-path distance from ``source`` to every node.

    Unreachable nodes get `UNREACHABLE`.
    """
    n = graph.num_nodes
    if not 0 <= source < n:
        raise ValueError(f"source {source} outside 0..{n - 1}")
    dist = np.full(n, UNREACHABLE, dtype=np.int64)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int64)
    level = 0
    while frontier.size:
        level += 1
        nxt = _gather_neighbors(graph, frontier)
        nxt = nxt[dist[nxt] == UNREACHABLE]
        if nxt.size:
            nxt = np.unique(nxt)
            dist[nxt] = level
        frontier = nxt
    return dist


@dataclass(frozen=True, eq=False)
class SigmaScores:
    """Per-node shift scores; ascending score order is in-distribution first.

    ``provenance`` records everything needed to reproduce the values
    (shift type, PageRank settings and iterations used, restart node).
    """

    shift_type: str
    values: np.ndarray
    provenance: dict = field(default_factory=dict)

    @property
    def num_nodes(self) -> int:
        return self.values.shape[0]

    def node_order(self) -> np.ndarray:
        """Node ids sorted by (score, id) ascending; a total order."""
        n = self.values.shape[0]
        return np.lexsort((np.arange(n), self.values))


def sigma_scores(
    graph: Graph,
    shift_type: str,
    config: PageRankConfig = PageRankConfig(),
) -> SigmaScores:
    """Compute the structural score that defines a shift.

    popularity
        Negated PageRank with uniform restart: low-popularity nodes score
        high and land out-of-distribution.
    locality
        Negated personalized PageRank restarted at the node of maximal
        global PageRank (ties to the smallest id): nodes far from that hub
        land out-of-distribution.
    density
        Negated local clustering coefficient: nodes in sparse
        neighborhoods land out-of-distribution.
    """
    if shift_type not in SHIFT_TYPES:
        raise ValueError(f"unknown shift type {shift_type!r}; expected one of {SHIFT_TYPES}")
    if config.restart_node is not None:
        raise ValueError("sigma_scores chooses the restart node itself; pass restart_node=None")
    if graph.num_nodes == 0:
        raise ValueError("sigma scores are undefined on an empty graph")

    provenance = {"shift_type": shift_type}
    if shift_type == "popularity":
        pi, iters, residual = _power_iteration(graph, config)
        values = -pi
        provenance.update(_pagerank_provenance(config, iters, residual))
    elif shift_type == "locality":
        pi, g_iters, g_residual = _power_iteration(graph, config)
        restart = int(np.argmax(pi))  # first occurrence: smallest id on ties
        personalized = PageRankConfig(
            alpha=config.alpha,
            tolerance=config.tolerance,
            max_iterations=config.max_iterations,
            restart_node=restart,
        )
        ppr, iters, residual = _power_iteration(graph, personalized)
        values = -ppr
        provenance.update(_pagerank_provenance(config, g_iters, g_residual, prefix="global_"))
        provenance.update(_pagerank_provenance(personalized, iters, residual))
        provenance["restart_node"] = restart
    else:
        values = -local_clustering(graph)
        provenance["definition"] = "negated local clustering coefficient"
    return SigmaScores(shift_type=shift_type, values=values, provenance=provenance)


def _pagerank_provenance(config: PageRankConfig, iterations: int, residual: float, prefix: str = ""):
    return {
        prefix + "alpha": config.alpha,
        prefix + "tolerance": config.tolerance,
        prefix + "max_iterations": config.max_iterations,
        prefix + "iterations_used": iterations,
        prefix + "final_residual": residual,
    }


def write_sigma_scores(scores: SigmaScores, csv_path, config_hash: Optional[str] = None) -> None:
    """Write scores as CSV rows ``node_id,sigma,shift_type`` plus a JSON sidecar.

    Floats are written with `repr`, which round-trips exactly. The sidecar
    ``<csv_path>.provenance.json`` holds the provenance mapping.
    """
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        if config_hash is not None:
            fh.write(f"# config_hash={config_hash}\n")
        for node, value in enumerate(scores.values):
            fh.write(f"{node},{float(value)!r},{scores.shift_type}\n")
    sidecar = dict(scores.provenance)
    if config_hash is not None:
        sidecar["config_hash"] = config_hash
    with open(str(csv_path) + ".provenance.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_sigma_scores(csv_path) -> SigmaScores:
    """Inverse of `write_sigma_scores`; restores values bit-exactly."""
    values = []
    shift_type = None
    with open(csv_path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split(",")
            if len(parts) != 3:
                raise ValueError(f"{csv_path}:{lineno}: expected node_id,sigma,shift_type")
            node = int(parts[0])
            if node != len(values):
                raise ValueError(f"{csv_path}:{lineno}: node ids must be dense and ascending")
            values.append(float(parts[1]))
            if shift_type is None:
                shift_type = parts[2]
            elif parts[2] != shift_type:
                raise ValueError(f"{csv_path}:{lineno}: mixed shift types in one file")
    if shift_type is None:
        raise ValueError(f"{csv_path}: no score rows")
    provenance = {}
    sidecar = str(csv_path) + ".provenance.json"
    try:
        with open(sidecar, "r", encoding="utf-8") as fh:
            provenance = json.load(fh)
        # the hash describes the writing run, not the scores themselves
        provenance.pop("config_hash", None)
    except FileNotFoundError:
        pass
    return SigmaScores(
        shift_type=shift_type,
        values=np.asarray(values, dtype=np.float64),
        provenance=provenance,
    )
