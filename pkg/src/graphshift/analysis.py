"""Descriptive statistics contrasting the ID and OOD sides of a split.

Distances are always measured on the whole graph; restricting the shortest
path to one side would misstate how far apart its nodes really are.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from graphshift.graph import Graph, NodeLabels
from graphshift.metrics import UNREACHABLE, bfs_distances
from graphshift.splits import SUBSETS, SplitAssignment

PARTS = ("id", "ood")

#: Above this many node pairs, distance histograms switch to sampling.
DEFAULT_MAX_PAIRS = 1_000_000


def class_balance(labels: NodeLabels, assignment: SplitAssignment) -> dict:
    """Per-subset class frequencies.

    Returns ``{subset: {"counts": [...], "frequencies": [...] or None}}``;
    an empty subset is flagged with ``None`` frequencies instead of a
    division by zero.
    """
    if labels.num_nodes != assignment.num_nodes:
        raise ValueError(
            f"labels cover {labels.num_nodes} nodes, split covers {assignment.num_nodes}"
        )
    out = {}
    for name in SUBSETS:
        nodes = assignment.nodes_in(name)
        counts = np.bincount(labels.labels[nodes], minlength=labels.num_classes)
        entry = {"counts": counts.astype(np.int64).tolist()}
        entry["frequencies"] = (
            (counts / nodes.shape[0]).tolist() if nodes.shape[0] else None
        )
        out[name] = entry
    return out


def _part_nodes(assignment: SplitAssignment, part: str) -> np.ndarray:
    if part not in PARTS:
        raise ValueError(f"part must be one of {PARTS}, got {part!r}")
    return assignment.id_nodes if part == "id" else assignment.ood_nodes


def degree_distribution(graph: Graph, assignment: SplitAssignment) -> dict:
    """Degree histograms for the ID and OOD parts on power-of-two bins.

    Bin edges are ``[0, 1, 2, 4, ..., 2^k]`` with the last edge exceeding
    the maximum degree; bins are half-open ``[lo, hi)``.
    """
    if graph.num_nodes != assignment.num_nodes:
        raise ValueError("graph and split node counts differ")
    max_degree = int(graph.degrees.max()) if graph.num_nodes else 0
    edges = [0, 1]
    while edges[-1] <= max_degree:
        edges.append(edges[-1] * 2)
    out = {"bin_edges": edges}
    for part in PARTS:
        nodes = _part_nodes(assignment, part)
        degrees = graph.degrees[nodes]
        counts = np.histogram(degrees, bins=np.asarray(edges))[0]
        out[part] = {
            "counts": counts.astype(np.int64).tolist(),
            "num_nodes": int(nodes.shape[0]),
            "mean_degree": float(degrees.mean()) if nodes.shape[0] else None,
        }
    return out


def _sample_without_replacement(total: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Floyd's sampler: k distinct draws from range(total), O(k) memory."""
    chosen = set()
    for j in range(total - k, total):
        t = int(rng.integers(0, j + 1))
        if t in chosen:
            t = j
        chosen.add(t)
    return np.fromiter(chosen, dtype=np.int64, count=k)


def _pair_endpoints(indices: np.ndarray, k: int):
    """Map flat pair indices to (i, j) with i < j over k items."""
    row_offsets = np.concatenate(
        ([0], np.cumsum(np.arange(k - 1, 0, -1, dtype=np.int64)))
    )
    i = np.searchsorted(row_offsets, indices, side="right") - 1
    j = indices - row_offsets[i] + i + 1
    return i, j


def distance_distribution(
    graph: Graph,
    assignment: SplitAssignment,
    part: str,
    max_pairs: int = DEFAULT_MAX_PAIRS,
    seed: int = 0,
) -> dict:
    """Histogram of whole-graph shortest-path distances within one part.

    All unordered node pairs inside the part are measured when their count
    is at most ``max_pairs``; otherwise exactly ``max_pairs`` pairs are
    drawn without replacement from a generator seeded with ``seed``.
    Pairs are drawn before any distance is evaluated, so the sample never
    depends on evaluation order. Unreachable pairs are tallied separately
    and excluded from the mean.
    """
    if graph.num_nodes != assignment.num_nodes:
        raise ValueError("graph and split node counts differ")
    if max_pairs < 1:
        raise ValueError("max_pairs must be positive")
    nodes = _part_nodes(assignment, part)
    k = nodes.shape[0]
    total = k * (k - 1) // 2
    exact = total <= max_pairs
    if total == 0:
        return {
            "part": part,
            "exact": True,
            "num_pairs": 0,
            "counts_by_distance": [],
            "unreachable_pairs": 0,
            "mean_distance": None,
        }
    if exact:
        left = np.repeat(np.arange(k), np.arange(k - 1, -1, -1))
        right = np.concatenate([np.arange(i + 1, k) for i in range(k)]) if k > 1 else np.empty(0, np.int64)
    else:
        rng = np.random.default_rng(seed)
        flat = np.sort(_sample_without_replacement(total, max_pairs, rng))
        left, right = _pair_endpoints(flat, k)

    num_pairs = left.shape[0]
    order = np.argsort(left, kind="stable")
    left = left[order]
    right = right[order]
    # one BFS per distinct source node, on the whole graph
    hist = np.zeros(1, dtype=np.int64)
    unreachable = 0
    dist_sum = 0
    reachable = 0
    starts = np.concatenate(
        ([0], np.flatnonzero(np.diff(left)) + 1, [num_pairs])
    )
    for s, e in zip(starts[:-1], starts[1:]):
        src = nodes[left[s]]
        dist = bfs_distances(graph, int(src))
        d = dist[nodes[right[s:e]]]
        bad = d == UNREACHABLE
        unreachable += int(bad.sum())
        d = d[~bad]
        if d.size:
            m = int(d.max())
            if m >= hist.shape[0]:
                hist = np.concatenate([hist, np.zeros(m + 1 - hist.shape[0], np.int64)])
            hist += np.bincount(d, minlength=hist.shape[0])
            dist_sum += int(d.sum())
            reachable += d.size
    return {
        "part": part,
        "exact": exact,
        "num_pairs": int(num_pairs),
        "counts_by_distance": hist.tolist(),
        "unreachable_pairs": int(unreachable),
        "mean_distance": (dist_sum / reachable) if reachable else None,
    }


@dataclass(frozen=True, eq=False)
class ShiftReport:
    """Bundle of split diagnostics, serializable to deterministic JSON."""

    class_balance: dict
    degree_distribution: dict
    distance_distribution: dict
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "class_balance": self.class_balance,
            "degree_distribution": self.degree_distribution,
            "distance_distribution": self.distance_distribution,
            "metadata": self.metadata,
        }

    def write_json(self, path, config_hash: Optional[str] = None) -> None:
        payload = self.to_dict()
        if config_hash is not None:
            payload["config_hash"] = config_hash
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


def write_histogram_csvs(report: ShiftReport, directory, config_hash: Optional[str] = None) -> list:
    """Flat CSV copies of the report histograms, for external plotting.

    Writes ``degree_histogram.csv`` with one row per degree bin and
    ``distance_histogram.csv`` with one row per distance; both carry ID
    and OOD counts side by side. Returns the paths written.
    """
    os.makedirs(directory, exist_ok=True)

    degree_path = os.path.join(directory, "degree_histogram.csv")
    edges = report.degree_distribution["bin_edges"]
    id_deg = report.degree_distribution["id"]["counts"]
    ood_deg = report.degree_distribution["ood"]["counts"]
    with open(degree_path, "w", encoding="utf-8", newline="\n") as fh:
        if config_hash is not None:
            fh.write(f"# config_hash={config_hash}\n")
        fh.write("bin_lo,bin_hi,id_count,ood_count\n")
        for k in range(len(edges) - 1):
            fh.write(f"{edges[k]},{edges[k + 1]},{id_deg[k]},{ood_deg[k]}\n")

    distance_path = os.path.join(directory, "distance_histogram.csv")
    id_hist = report.distance_distribution["id"]["counts_by_distance"]
    ood_hist = report.distance_distribution["ood"]["counts_by_distance"]
    with open(distance_path, "w", encoding="utf-8", newline="\n") as fh:
        if config_hash is not None:
            fh.write(f"# config_hash={config_hash}\n")
        fh.write("distance,id_count,ood_count\n")
        for d in range(max(len(id_hist), len(ood_hist))):
            left = id_hist[d] if d < len(id_hist) else 0
            right = ood_hist[d] if d < len(ood_hist) else 0
            fh.write(f"{d},{left},{right}\n")
    return [degree_path, distance_path]


def build_shift_report(
    graph: Graph,
    labels: NodeLabels,
    assignment: SplitAssignment,
    max_pairs: int = DEFAULT_MAX_PAIRS,
    seed: int = 0,
) -> ShiftReport:
    """Compute all split diagnostics in one pass."""
    distances = {
        part: distance_distribution(graph, assignment, part, max_pairs=max_pairs, seed=seed)
        for part in PARTS
    }
    metadata = dict(assignment.metadata)
    metadata["distance_sampling"] = {"max_pairs": max_pairs, "seed": seed}
    return ShiftReport(
        class_balance=class_balance(labels, assignment),
        degree_distribution=degree_distribution(graph, assignment),
        distance_distribution=distances,
        metadata=metadata,
    )
