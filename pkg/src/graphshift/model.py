"""Feature propagation plus a multinomial logistic-regression baseline.

The classifier is deliberately simple: propagated features are fixed
inputs and only a linear layer is trained, full batch, plain gradient
descent. That keeps every run bit-reproducible and makes the training
objective easy to check against finite differences.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse
from threadpoolctl import threadpool_limits

from graphshift.graph import Graph, NodeFeatures, NodeLabels
from graphshift.splits import SplitAssignment


class TrainingDivergedError(RuntimeError):
    """Loss or parameters became non-finite during training."""

    def __init__(self, epoch: int):
        super().__init__(f"training diverged at epoch {epoch}")
        self.epoch = epoch


@dataclass(frozen=True)
class PropagationConfig:
    """Settings for symmetric-normalized feature smoothing.

    ``num_steps`` applications of ``S = D~^{-1/2} (A + I) D~^{-1/2}``
    with ``D~ = D + I``; zero steps return the input unchanged.
    """

    num_steps: int = 2

    def __post_init__(self):
        if self.num_steps < 0:
            raise ValueError("num_steps must be non-negative")

    def to_dict(self) -> dict:
        return {"num_steps": self.num_steps, "normalization": "symmetric"}


@dataclass(frozen=True)
class TrainConfig:
    """Gradient-descent settings for the linear classifier."""

    learning_rate: float = 3e-4
    weight_decay: float = 1e-5
    max_epochs: int = 1000
    patience: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be non-negative")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be at least 1")
        if self.patience < 1:
            raise ValueError("patience must be at least 1")

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "weight_decay": self.weight_decay,
            "max_epochs": self.max_epochs,
            "patience": self.patience,
            "seed": self.seed,
        }


def normalize_rows(features: NodeFeatures) -> NodeFeatures:
    """L2-normalize each feature row; all-zero rows stay zero."""
    norms = np.linalg.norm(features.matrix, axis=1, keepdims=True)
    out = np.zeros_like(features.matrix)
    np.divide(features.matrix, norms, out=out, where=norms > 0)
    return NodeFeatures(matrix=out)


def _propagation_operator(graph: Graph) -> scipy.sparse.csr_matrix:
    adj = graph.to_scipy() + scipy.sparse.identity(graph.num_nodes, format="csr")
    inv_sqrt = 1.0 / np.sqrt(graph.degrees.astype(np.float64) + 1.0)
    scale = scipy.sparse.diags(inv_sqrt)
    return (scale @ adj @ scale).tocsr()


def propagate_features(
    graph: Graph,
    features: NodeFeatures,
    config: PropagationConfig = PropagationConfig(),
) -> NodeFeatures:
    """Smooth features over the graph: ``num_steps`` applications of S.

    Self-loops are added before symmetric normalization, so every node
    keeps part of its own signal. With ``num_steps=0`` the input comes
    back unchanged (and unnormalized; call `normalize_rows` first if the
    classifier expects unit rows).
    """
    if graph.num_nodes != features.num_nodes:
        raise ValueError(
            f"graph has {graph.num_nodes} nodes, features have {features.num_nodes} rows"
        )
    if config.num_steps == 0:
        return features
    operator = _propagation_operator(graph)
    matrix = features.matrix
    for _ in range(config.num_steps):
        matrix = operator @ matrix
    return NodeFeatures(matrix=matrix)


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def _cross_entropy(probs: np.ndarray, labels: np.ndarray) -> float:
    # clip guards exact zeros produced by underflow; tiny floor, no bias
    picked = probs[np.arange(labels.shape[0]), labels]
    return float(-np.log(np.maximum(picked, 1e-300)).mean())


def loss_and_gradient(
    weights: np.ndarray,
    bias: np.ndarray,
    features: np.ndarray,
    labels: np.ndarray,
    weight_decay: float,
):
    """Training objective and its exact gradient.

    Objective: mean cross-entropy over the given rows plus
    ``0.5 * weight_decay * ||W||^2``; the bias is not penalized.
    Returns ``(loss, grad_weights, grad_bias)``.
    """
    m = features.shape[0]
    logits = features @ weights + bias
    probs = _softmax(logits)
    loss = _cross_entropy(probs, labels) + 0.5 * weight_decay * float((weights**2).sum())
    delta = probs
    delta[np.arange(m), labels] -= 1.0
    delta /= m
    grad_w = features.T @ delta + weight_decay * weights
    grad_b = delta.sum(axis=0)
    return loss, grad_w, grad_b


@dataclass(frozen=True, eq=False)
class ClassifierModel:
    """Trained linear classifier: logits are ``X @ weights + bias``."""

    weights: np.ndarray
    bias: np.ndarray
    training_log: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def num_classes(self) -> int:
        return self.weights.shape[1]

    def save(self, path, config_hash: Optional[str] = None) -> None:
        """JSON dump with repr-exact float round-tripping."""
        payload = {
            "weights": [[float(v) for v in row] for row in self.weights],
            "bias": [float(v) for v in self.bias],
            "training_log": self.training_log,
            "metadata": self.metadata,
        }
        if config_hash is not None:
            payload["config_hash"] = config_hash
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "ClassifierModel":
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        return cls(
            weights=np.asarray(payload["weights"], dtype=np.float64),
            bias=np.asarray(payload["bias"], dtype=np.float64),
            training_log=payload.get("training_log", []),
            metadata=payload.get("metadata", {}),
        )


def train(
    features: NodeFeatures,
    labels: NodeLabels,
    assignment: SplitAssignment,
    config: TrainConfig = TrainConfig(),
) -> ClassifierModel:
    """Fit the linear classifier on Train, early-stopping on Valid-In loss.

    Full-batch gradient descent; after each epoch the Valid-In
    cross-entropy (without the weight penalty) is evaluated, and the
    parameters of the best epoch so far are kept. Training stops when the
    best value has not improved for ``patience`` epochs. Runs under a
    single BLAS thread so results do not depend on the host's thread
    count.
    """
    if features.num_nodes != labels.num_nodes or features.num_nodes != assignment.num_nodes:
        raise ValueError("features, labels, and split must cover the same nodes")
    train_nodes = assignment.nodes_in("train")
    valid_nodes = assignment.nodes_in("valid_in")
    if train_nodes.size == 0:
        raise ValueError("training subset is empty")
    if valid_nodes.size == 0:
        raise ValueError("early stopping needs a non-empty valid_in subset")

    x_train = np.ascontiguousarray(features.matrix[train_nodes])
    y_train = labels.labels[train_nodes]
    x_valid = np.ascontiguousarray(features.matrix[valid_nodes])
    y_valid = labels.labels[valid_nodes]
    num_classes = labels.num_classes

    rng = np.random.default_rng(config.seed)
    weights = rng.normal(0.0, 0.01, size=(features.feature_dim, num_classes))
    bias = np.zeros(num_classes, dtype=np.float64)

    best_loss = np.inf
    best_epoch = 0
    best_weights = weights.copy()
    best_bias = bias.copy()
    log = []
    with threadpool_limits(limits=1):
        for epoch in range(1, config.max_epochs + 1):
            loss, grad_w, grad_b = loss_and_gradient(
                weights, bias, x_train, y_train, config.weight_decay
            )
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch)
            weights = weights - config.learning_rate * grad_w
            bias = bias - config.learning_rate * grad_b
            if not (np.isfinite(weights).all() and np.isfinite(bias).all()):
                raise TrainingDivergedError(epoch)
            valid_probs = _softmax(x_valid @ weights + bias)
            valid_loss = _cross_entropy(valid_probs, y_valid)
            if not np.isfinite(valid_loss):
                raise TrainingDivergedError(epoch)
            log.append(
                {"epoch": epoch, "train_loss": loss, "valid_loss": valid_loss}
            )
            if valid_loss < best_loss:
                best_loss = valid_loss
                best_epoch = epoch
                best_weights = weights.copy()
                best_bias = bias.copy()
            elif epoch - best_epoch >= config.patience:
                break

    metadata = {
        "config": config.to_dict(),
        "num_classes": num_classes,
        "feature_dim": features.feature_dim,
        "best_epoch": best_epoch,
        "best_valid_loss": best_loss,
        "epochs_run": log[-1]["epoch"],
    }
    return ClassifierModel(
        weights=best_weights, bias=best_bias, training_log=log, metadata=metadata
    )


def predict_proba(model: ClassifierModel, features: NodeFeatures) -> np.ndarray:
    """Class probabilities for every node, numerically stable softmax."""
    if features.feature_dim != model.weights.shape[0]:
        raise ValueError(
            f"feature dim {features.feature_dim} does not match model "
            f"({model.weights.shape[0]})"
        )
    with threadpool_limits(limits=1):
        logits = features.matrix @ model.weights + model.bias
    return _softmax(logits)


def softmax_entropy(probs: np.ndarray) -> np.ndarray:
    """Shannon entropy per row in nats, with ``0 * log 0 = 0``."""
    probs = np.asarray(probs, dtype=np.float64)
    terms = np.zeros_like(probs)
    positive = probs > 0
    np.multiply(
        probs, np.log(probs, out=np.zeros_like(probs), where=positive),
        out=terms, where=positive,
    )
    return -terms.sum(axis=1)
