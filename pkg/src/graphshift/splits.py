"""Score-ordered five-way node splits.

Nodes are sorted by (sigma, id) ascending; the low-score prefix becomes
the in-distribution pool and the high-score suffix the out-of-distribution
pool. The ID pool is shuffled with a seeded generator and cut into Train /
Valid-In / Test-In; the OOD pool keeps its score order and is cut into
Valid-Out / Test-Out, so the ID/OOD frontier never depends on the seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional
import warnings

import numpy as np

from graphshift.metrics import SigmaScores

SUBSETS = ("train", "valid_in", "test_in", "valid_out", "test_out")

_FORMAT_NAME = "graphshift-split"
_FORMAT_VERSION = 1


@dataclass(frozen=True)
class SplitConfig:
    """Subset fractions plus the shuffle seed.

    Fractions must be non-negative and sum to one. The first three cover
    the in-distribution pool, the last two the out-of-distribution pool.
    """

    train_fraction: float = 0.30
    valid_in_fraction: float = 0.10
    test_in_fraction: float = 0.10
    valid_out_fraction: float = 0.10
    test_out_fraction: float = 0.40
    seed: int = 0

    def __post_init__(self):
        fractions = self.fractions()
        if any(f < 0 for f in fractions):
            raise ValueError("subset fractions must be non-negative")
        total = math.fsum(fractions)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"subset fractions must sum to 1, got {total!r}")

    def fractions(self) -> tuple:
        return (
            self.train_fraction,
            self.valid_in_fraction,
            self.test_in_fraction,
            self.valid_out_fraction,
            self.test_out_fraction,
        )

    @property
    def id_fraction(self) -> float:
        return self.train_fraction + self.valid_in_fraction + self.test_in_fraction

    @classmethod
    def from_id_fraction(cls, id_fraction: float, seed: int = 0) -> "SplitConfig":
        """Scale the default fractions to a new in-distribution share.

        Keeps the 3:1:1 proportions inside the ID pool and 1:4 inside the
        OOD pool, so 0.5 reproduces the defaults.
        """
        if not 0.0 < id_fraction < 1.0:
            raise ValueError("id_fraction must lie strictly between 0 and 1")
        ood = 1.0 - id_fraction
        return cls(
            train_fraction=id_fraction * 0.6,
            valid_in_fraction=id_fraction * 0.2,
            test_in_fraction=id_fraction * 0.2,
            valid_out_fraction=ood * 0.2,
            test_out_fraction=ood * 0.8,
            seed=seed,
        )

    def to_dict(self) -> dict:
        return {
            "train_fraction": self.train_fraction,
            "valid_in_fraction": self.valid_in_fraction,
            "test_in_fraction": self.test_in_fraction,
            "valid_out_fraction": self.valid_out_fraction,
            "test_out_fraction": self.test_out_fraction,
            "seed": self.seed,
        }


def subset_sizes(num_nodes: int, config: SplitConfig) -> np.ndarray:
    """Integer subset sizes by largest-remainder apportionment.

    Quotas ``fraction * num_nodes`` are floored; leftover seats go to the
    largest fractional remainders, ties broken in subset order (Train
    first, Test-Out last), so any final remainder lands on Test-Out.
    Arithmetic runs on exact rationals, making the result independent of
    floating-point noise in the stored fractions.
    """
    quotas = [Fraction(f) * num_nodes for f in config.fractions()]
    base = [int(q) for q in quotas]  # int() floors non-negative rationals
    leftover = num_nodes - sum(base)
    remainders = sorted(
        range(len(quotas)), key=lambda k: (-(quotas[k] - base[k]), k)
    )
    sizes = list(base)
    for k in remainders[:leftover]:
        sizes[k] += 1
    return np.asarray(sizes, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class SplitAssignment:
    """Per-node subset tags for one generated split.

    ``codes[i]`` indexes into `SUBSETS`. ``metadata`` carries the full
    generation record: fractions, seed, generator name, shift type, and
    the sigma provenance.
    """

    codes: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def num_nodes(self) -> int:
        return self.codes.shape[0]

    def nodes_in(self, subset: str) -> np.ndarray:
        """Sorted node ids of one subset; `SUBSETS` lists valid names."""
        return np.flatnonzero(self.codes == SUBSETS.index(subset))

    def counts(self) -> dict:
        return {name: int(np.count_nonzero(self.codes == k)) for k, name in enumerate(SUBSETS)}

    @property
    def id_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.codes <= SUBSETS.index("test_in"))

    @property
    def ood_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.codes > SUBSETS.index("test_in"))


def generate_split(scores: SigmaScores, config: SplitConfig = SplitConfig()) -> SplitAssignment:
    """Cut a scored node set into the five benchmark subsets.

    The in-distribution block (the ``id_fraction`` prefix of the score
    order) is shuffled by a seeded PCG64 generator before the Train /
    Valid-In / Test-In cut; the out-of-distribution block stays in score
    order and its prefix becomes Valid-Out. Changing the seed therefore
    reshuffles the ID subsets but never moves the ID/OOD frontier.
    """
    values = np.asarray(scores.values, dtype=np.float64)
    if values.ndim != 1 or values.shape[0] == 0:
        raise ValueError("scores must be a non-empty one-dimensional array")
    if not np.isfinite(values).all():
        raise ValueError("sigma scores must be finite")
    n = values.shape[0]
    sizes = subset_sizes(n, config)
    empty = [SUBSETS[k] for k in range(5) if sizes[k] == 0]
    if empty:
        warnings.warn(f"empty subsets for n={n}: {', '.join(empty)}", stacklevel=2)

    order = scores.node_order()
    id_count = int(sizes[:3].sum())
    id_block = order[:id_count]
    ood_block = order[id_count:]

    rng = np.random.default_rng(config.seed)
    shuffled = id_block[rng.permutation(id_count)]

    codes = np.empty(n, dtype=np.int64)
    bounds = np.concatenate(([0], np.cumsum(sizes[:3])))
    for k in range(3):
        codes[shuffled[bounds[k] : bounds[k + 1]]] = k
    codes[ood_block[: sizes[3]]] = 3
    codes[ood_block[sizes[3] :]] = 4

    from graphshift import __version__  # deferred: package init imports this module

    metadata = {
        "config": config.to_dict(),
        "prng": "numpy.random.default_rng (PCG64)",
        "shift_type": scores.shift_type,
        "sigma_provenance": dict(scores.provenance),
        "toolkit_version": __version__,
    }
    return SplitAssignment(codes=codes, metadata=metadata)


def write_split(assignment: SplitAssignment, path, config_hash: Optional[str] = None) -> None:
    """Write a split as deterministic JSON (sorted keys, fixed layout)."""
    payload = {
        "format": _FORMAT_NAME,
        "format_version": _FORMAT_VERSION,
        "num_nodes": assignment.num_nodes,
        "metadata": assignment.metadata,
        "subsets": {
            name: [int(v) for v in assignment.nodes_in(name)] for name in SUBSETS
        },
    }
    if config_hash is not None:
        payload["config_hash"] = config_hash
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_split_csv(assignment: SplitAssignment, path, config_hash: Optional[str] = None) -> None:
    """Companion CSV ``node_id,subset`` sorted by node id."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if config_hash is not None:
            fh.write(f"# config_hash={config_hash}\n")
        for node in range(assignment.num_nodes):
            fh.write(f"{node},{SUBSETS[assignment.codes[node]]}\n")


def read_split(path, expected_num_nodes: Optional[int] = None) -> SplitAssignment:
    """Load a split file, checking format version and node-space totality."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != _FORMAT_NAME:
        raise ValueError(f"{path}: not a {_FORMAT_NAME} file")
    if payload.get("format_version") != _FORMAT_VERSION:
        raise ValueError(
            f"{path}: format version {payload.get('format_version')} "
            f"not supported (expected {_FORMAT_VERSION})"
        )
    n = payload["num_nodes"]
    if expected_num_nodes is not None and n != expected_num_nodes:
        raise ValueError(
            f"{path}: split covers {n} nodes but the graph has {expected_num_nodes}"
        )
    codes = np.full(n, -1, dtype=np.int64)
    for k, name in enumerate(SUBSETS):
        nodes = np.asarray(payload["subsets"][name], dtype=np.int64)
        if nodes.size:
            if nodes.min() < 0 or nodes.max() >= n:
                raise ValueError(f"{path}: node id out of range in subset {name}")
            if np.any(codes[nodes] >= 0):
                raise ValueError(f"{path}: node assigned to more than one subset")
            codes[nodes] = k
    if np.any(codes < 0):
        missing = int(np.flatnonzero(codes < 0)[0])
        raise ValueError(f"{path}: node {missing} is not assigned to any subset")
    return SplitAssignment(codes=codes, metadata=payload.get("metadata", {}))
