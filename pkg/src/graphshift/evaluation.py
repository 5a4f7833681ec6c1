"""Accuracy, shift-induced degradation, and uncertainty-based OOD detection.

AUROC is computed from midranks, which matches exhaustive pair counting
(ties contribute one half) exactly, not just to within rounding.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.stats

from graphshift.graph import NodeLabels
from graphshift.model import ClassifierModel, predict_proba, softmax_entropy
from graphshift.splits import SplitAssignment


def accuracy(predictions: np.ndarray, labels: NodeLabels, nodes: np.ndarray) -> float:
    """Exact-match fraction over ``nodes``."""
    nodes = np.asarray(nodes)
    if nodes.size == 0:
        raise ValueError("accuracy over an empty node set is undefined")
    return float((predictions[nodes] == labels.labels[nodes]).mean())


def accuracy_drop(accuracy_id: float, accuracy_ood: float) -> float:
    """Relative change in percent: ``100 * (ood - id) / id``.

    Negative values mean the shift hurt; the sign is preserved so an OOD
    improvement shows up as positive.
    """
    if accuracy_id == 0:
        raise ValueError("relative drop is undefined when ID accuracy is zero")
    return 100.0 * (accuracy_ood - accuracy_id) / accuracy_id


def auroc(scores: np.ndarray, is_positive: np.ndarray) -> float:
    """Probability that a random positive outscores a random negative.

    Midrank formulation: ``(R_pos - n_pos (n_pos + 1) / 2) / (n_pos n_neg)``
    where ``R_pos`` is the rank sum of positives under average ranks.
    Ties count one half, exactly as in pairwise counting.
    """
    scores = np.asarray(scores, dtype=np.float64)
    is_positive = np.asarray(is_positive, dtype=bool)
    if scores.shape != is_positive.shape:
        raise ValueError("scores and indicator must have the same shape")
    n_pos = int(is_positive.sum())
    n_neg = scores.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUROC needs at least one positive and one negative")
    ranks = scipy.stats.rankdata(scores, method="average")
    rank_sum = float(ranks[is_positive].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


@dataclass(frozen=True, eq=False)
class EvalReport:
    """Evaluation results for one trained model on one split."""

    accuracy_id: float
    accuracy_ood: float
    drop_percent: float
    ood_auroc: float
    subset_accuracy: dict
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "accuracy_id": self.accuracy_id,
            "accuracy_ood": self.accuracy_ood,
            "drop_percent": self.drop_percent,
            "ood_auroc": self.ood_auroc,
            "subset_accuracy": self.subset_accuracy,
            "metadata": self.metadata,
        }

    def write_json(self, path, config_hash: Optional[str] = None) -> None:
        payload = self.to_dict()
        if config_hash is not None:
            payload["config_hash"] = config_hash
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def read_json(cls, path) -> "EvalReport":
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        return cls(
            accuracy_id=payload["accuracy_id"],
            accuracy_ood=payload["accuracy_ood"],
            drop_percent=payload["drop_percent"],
            ood_auroc=payload["ood_auroc"],
            subset_accuracy=payload.get("subset_accuracy", {}),
            metadata=payload.get("metadata", {}),
        )


def build_report(
    model: ClassifierModel,
    features,
    labels: NodeLabels,
    assignment: SplitAssignment,
) -> EvalReport:
    """Evaluate a model on the held-out subsets of one split.

    ID accuracy comes from Test-In and OOD accuracy from Test-Out;
    predictions are argmax class probabilities (ties to the smallest
    class id). The OOD detector scores Test-In against Test-Out by
    softmax entropy, Test-Out being the positive class.
    """
    probs = predict_proba(model, features)
    predictions = np.argmax(probs, axis=1)

    test_in = assignment.nodes_in("test_in")
    test_out = assignment.nodes_in("test_out")
    acc_id = accuracy(predictions, labels, test_in)
    acc_ood = accuracy(predictions, labels, test_out)

    entropy = softmax_entropy(probs)
    pool = np.concatenate([test_in, test_out])
    detector = auroc(entropy[pool], np.concatenate(
        [np.zeros(test_in.shape[0], bool), np.ones(test_out.shape[0], bool)]
    ))

    subset_accuracy = {}
    for name in ("train", "valid_in", "test_in", "valid_out", "test_out"):
        nodes = assignment.nodes_in(name)
        if nodes.size:
            subset_accuracy[name] = accuracy(predictions, labels, nodes)

    metadata = {
        "split": dict(assignment.metadata),
        "model": dict(model.metadata),
        "uncertainty_score": "softmax entropy",
    }
    return EvalReport(
        accuracy_id=acc_id,
        accuracy_ood=acc_ood,
        drop_percent=accuracy_drop(acc_id, acc_ood),
        ood_auroc=detector,
        subset_accuracy=subset_accuracy,
        metadata=metadata,
    )


_AGGREGATE_FIELDS = ("accuracy_id", "accuracy_ood", "drop_percent", "ood_auroc")


def aggregate_reports(reports: list) -> list:
    """Group per-seed reports by shift type; mean and std per metric.

    Standard deviation is the population one over seeds (ddof=0), zero
    for a single seed. Returns one row dict per shift type, ordered by
    first appearance.
    """
    groups: dict = {}
    for report in reports:
        shift = report.metadata.get("split", {}).get("shift_type", "unknown")
        groups.setdefault(shift, []).append(report)
    rows = []
    for shift, members in groups.items():
        row = {"shift_type": shift, "num_seeds": len(members)}
        for name in _AGGREGATE_FIELDS:
            values = [getattr(r, name) for r in members]
            mean = math.fsum(values) / len(values)
            var = math.fsum((v - mean) ** 2 for v in values) / len(values)
            row[name + "_mean"] = mean
            row[name + "_std"] = math.sqrt(var)
        rows.append(row)
    return rows


def write_aggregate_csv(rows: list, path, config_hash: Optional[str] = None) -> None:
    """Aggregate table as CSV; floats use repr for exact round-tripping."""
    header = ["shift_type", "num_seeds"]
    for name in _AGGREGATE_FIELDS:
        header += [name + "_mean", name + "_std"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if config_hash is not None:
            fh.write(f"# config_hash={config_hash}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [row["shift_type"], row["num_seeds"]]
                + [repr(row[name + suffix]) for name in _AGGREGATE_FIELDS for suffix in ("_mean", "_std")]
            )
