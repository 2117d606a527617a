"""Two-layer spectral graph convolution for binary node classification.

Variants
--------
renormalized
    First-order propagation with the renormalized operator
    A^ = D~^(-1/2)(A+I)D~^(-1/2):  scores = A^ relu(A^ X W0) W1.
chebyshev
    Polynomial filters of order k over the rescaled Laplacian: each
    layer sums per-order terms sum_j T_j(L~) H W_j before the
    nonlinearity, with one weight block per order.

Training is full-batch gradient descent on class-weighted
cross-entropy; all gradients are analytic (verified against central
finite differences by `gradient_check`). Multiple snapshot graphs are
combined block-diagonally into one disconnected graph per step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import NonFiniteLoss
from .graph_ops import (
    chebyshev_basis,
    normalized_laplacian,
    renormalize_adjacency,
    scale_laplacian,
    union_matrices,
)

N_INPUT = 8
N_CLASSES = 2

VARIANT_RENORMALIZED = "renormalized"
VARIANT_CHEBYSHEV = "chebyshev"
_VARIANTS = (VARIANT_RENORMALIZED, VARIANT_CHEBYSHEV)


@dataclass
class TrainConfig:
    variant: str = VARIANT_RENORMALIZED
    k: int = 1
    hidden: int = 16
    learning_rate: float = 0.01
    epochs: int = 200
    class_weights: tuple[float, float] | None = None  # None -> inverse class frequency
    seed: int = 0
    weighted_adjacency: bool = False

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.variant == VARIANT_RENORMALIZED and self.k != 1:
            raise ValueError("the renormalized variant is first-order (k=1)")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.hidden < 1:
            raise ValueError(f"hidden size must be >= 1, got {self.hidden}")
        if self.epochs < 0 or self.learning_rate < 0:
            raise ValueError("epochs and learning_rate must be >= 0")


@dataclass
class GcnModel:
    variant: str
    k: int
    hidden: int
    seed: int
    w0: list[np.ndarray]  # input->hidden, one block per polynomial order
    w1: list[np.ndarray]  # hidden->output blocks

    @property
    def n_blocks(self) -> int:
        return len(self.w0)


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    scale = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-scale, scale, size=(fan_in, fan_out))


def init_model(config: TrainConfig) -> GcnModel:
    rng = np.random.default_rng(config.seed)
    blocks = 1 if config.variant == VARIANT_RENORMALIZED else config.k + 1
    w0 = [_glorot(rng, N_INPUT, config.hidden) for _ in range(blocks)]
    w1 = [_glorot(rng, config.hidden, N_CLASSES) for _ in range(blocks)]
    return GcnModel(variant=config.variant, k=config.k, hidden=config.hidden,
                    seed=config.seed, w0=w0, w1=w1)


def build_operator(graph_or_a, variant: str, *, weighted: bool = False) -> np.ndarray:
    """The propagation matrix: A^ (renormalized) or L~ (chebyshev)."""
    if isinstance(graph_or_a, np.ndarray):
        a = graph_or_a
    else:
        from .graph_ops import adjacency_matrix
        a = adjacency_matrix(graph_or_a, weighted=weighted)
    if variant == VARIANT_RENORMALIZED:
        return renormalize_adjacency(a)
    return scale_laplacian(normalized_laplacian(a)).matrix


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _log_softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def forward(model: GcnModel, operator: np.ndarray, features: np.ndarray):
    """Per-node class scores (n x 2) and softmax probabilities."""
    if model.variant == VARIANT_RENORMALIZED:
        z1 = (operator @ features) @ model.w0[0]
        h = np.maximum(z1, 0.0)
        scores = (operator @ h) @ model.w1[0]
    else:
        basis = chebyshev_basis(operator, features, model.k)
        z1 = sum(b @ w for b, w in zip(basis, model.w0))
        h = np.maximum(z1, 0.0)
        h_basis = chebyshev_basis(operator, h, model.k)
        scores = sum(b @ w for b, w in zip(h_basis, model.w1))
    return scores, _softmax(scores)


def inverse_frequency_weights(labels: np.ndarray) -> tuple[float, float]:
    """n / (2 * count_c) per class; a balanced dataset gives (1, 1)."""
    counts = np.bincount(labels, minlength=N_CLASSES)
    n = len(labels)
    return tuple(n / (N_CLASSES * max(int(c), 1)) for c in counts[:N_CLASSES])


def loss_and_grads(model: GcnModel, operator: np.ndarray, features: np.ndarray,
                   labels: np.ndarray, class_weights: tuple[float, float]):
    """Class-weighted cross-entropy and analytic parameter gradients.

    loss = sum_i w_{y_i} * (-log p_{i, y_i}) / sum_i w_{y_i}
    """
    n = len(labels)
    rows = np.arange(n)
    sample_w = np.asarray(class_weights, dtype=float)[labels]
    total_w = sample_w.sum()

    if model.variant == VARIANT_RENORMALIZED:
        m0 = operator @ features
        z1 = m0 @ model.w0[0]
        h = np.maximum(z1, 0.0)
        m1 = operator @ h
        scores = m1 @ model.w1[0]
    else:
        basis = chebyshev_basis(operator, features, model.k)
        z1 = sum(b @ w for b, w in zip(basis, model.w0))
        h = np.maximum(z1, 0.0)
        h_basis = chebyshev_basis(operator, h, model.k)
        scores = sum(b @ w for b, w in zip(h_basis, model.w1))

    log_p = _log_softmax(scores)
    loss = float(-(sample_w * log_p[rows, labels]).sum() / total_w)

    d_scores = np.exp(log_p)
    d_scores[rows, labels] -= 1.0
    d_scores *= (sample_w / total_w)[:, None]

    if model.variant == VARIANT_RENORMALIZED:
        gw1 = [m1.T @ d_scores]
        dh = (operator @ d_scores) @ model.w1[0].T  # operator is symmetric
        dz1 = dh * (z1 > 0.0)
        gw0 = [m0.T @ dz1]
    else:
        gw1 = [b.T @ d_scores for b in h_basis]
        # T_j(L~) is symmetric, so the adjoint of each per-order term is
        # T_j applied to the upstream gradient
        g_basis = chebyshev_basis(operator, d_scores, model.k)
        dh = sum(g @ w.T for g, w in zip(g_basis, model.w1))
        dz1 = dh * (z1 > 0.0)
        gw0 = [b.T @ dz1 for b in basis]
    return loss, gw0, gw1


def train(graphs, config: TrainConfig, model: GcnModel | None = None):
    """Full-batch gradient descent; returns (model, per-epoch loss trace)."""
    if not graphs:
        raise ValueError("need at least one training graph")
    if any(g.n_nodes == 0 for g in graphs):
        raise ValueError("training graphs must be non-empty")
    a, x, y = union_matrices(graphs, weighted=config.weighted_adjacency)
    operator = build_operator(a, config.variant)
    class_weights = config.class_weights or inverse_frequency_weights(y)
    if model is None:
        model = init_model(config)

    losses: list[float] = []
    for epoch in range(config.epochs):
        loss, gw0, gw1 = loss_and_grads(model, operator, x, y, class_weights)
        if not np.isfinite(loss):
            raise NonFiniteLoss(epoch)
        losses.append(loss)
        for w, g in zip(model.w0, gw0):
            w -= config.learning_rate * g
        for w, g in zip(model.w1, gw1):
            w -= config.learning_rate * g
        if not all(np.isfinite(w).all() for w in model.w0 + model.w1):
            raise NonFiniteLoss(epoch)
    return model, losses


def gradient_check(model: GcnModel, graph, *, weighted: bool = False,
                   class_weights: tuple[float, float] = (1.0, 1.0),
                   step: float = 1e-6) -> float:
    """Max relative error between analytic and central finite differences."""
    a, x, y = union_matrices([graph], weighted=weighted)
    operator = build_operator(a, model.variant)
    _, gw0, gw1 = loss_and_grads(model, operator, x, y, class_weights)

    def loss_at() -> float:
        loss, _, _ = loss_and_grads(model, operator, x, y, class_weights)
        return loss

    max_err = 0.0
    for blocks, grads in ((model.w0, gw0), (model.w1, gw1)):
        for w, g in zip(blocks, grads):
            it = np.nditer(w, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                original = w[idx]
                w[idx] = original + step
                upper = loss_at()
                w[idx] = original - step
                lower = loss_at()
                w[idx] = original
                numeric = (upper - lower) / (2.0 * step)
                analytic = float(g[idx])
                err = abs(analytic - numeric) / max(1.0, abs(analytic), abs(numeric))
                max_err = max(max_err, err)
    return max_err


@dataclass
class EvalMetrics:
    accuracy: float
    precision: tuple[float, float]  # per class; 0.0 when undefined
    recall: tuple[float, float]
    balanced_accuracy: float
    n_nodes: int

    def as_dict(self) -> dict[str, float]:
        return {
            "accuracy": self.accuracy,
            "precision_normal": self.precision[0],
            "precision_attack": self.precision[1],
            "recall_normal": self.recall[0],
            "recall_attack": self.recall[1],
            "balanced_accuracy": self.balanced_accuracy,
            "n_nodes": self.n_nodes,
        }


def evaluate(model: GcnModel, graphs, *, weighted: bool = False) -> EvalMetrics:
    """Metrics over the disconnected union of the given graphs.

    Balanced accuracy averages recall over the classes present in the
    labels; per-class precision/recall report 0.0 when undefined.
    """
    a, x, y = union_matrices(graphs, weighted=weighted)
    operator = build_operator(a, model.variant)
    _, probs = forward(model, operator, x)
    predicted = probs.argmax(axis=1)

    precision, recall, present_recalls = [], [], []
    for c in range(N_CLASSES):
        tp = int(np.sum((predicted == c) & (y == c)))
        fp = int(np.sum((predicted == c) & (y != c)))
        fn = int(np.sum((predicted != c) & (y == c)))
        precision.append(tp / (tp + fp) if tp + fp else 0.0)
        recall.append(tp / (tp + fn) if tp + fn else 0.0)
        if np.any(y == c):
            present_recalls.append(recall[-1])
    return EvalMetrics(
        accuracy=float(np.mean(predicted == y)) if len(y) else 0.0,
        precision=(precision[0], precision[1]),
        recall=(recall[0], recall[1]),
        balanced_accuracy=float(np.mean(present_recalls)) if present_recalls else 0.0,
        n_nodes=len(y),
    )


def save_model(path, model: GcnModel) -> None:
    """Plain-text export: header lines, then row-major weight blocks."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("gcn-model v1\n")
        fh.write(f"variant {model.variant}\n")
        fh.write(f"k {model.k}\n")
        fh.write(f"hidden {model.hidden}\n")
        fh.write(f"seed {model.seed}\n")
        fh.write(f"blocks {model.n_blocks}\n")
        for name, blocks in (("w0", model.w0), ("w1", model.w1)):
            for j, w in enumerate(blocks):
                fh.write(f"{name} {j} {w.shape[0]} {w.shape[1]}\n")
                for row in w:
                    fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_model(path) -> GcnModel:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if lines[0] != "gcn-model v1":
        raise ValueError(f"not a model file: {lines[0]!r}")
    header = dict(ln.split(" ", 1) for ln in lines[1:6])
    n_blocks = int(header["blocks"])
    at = 6
    blocks: dict[str, list[np.ndarray]] = {"w0": [], "w1": []}
    for _ in range(2 * n_blocks):
        name, _, rows, cols = lines[at].split()
        rows, cols = int(rows), int(cols)
        data = [[float(v) for v in ln.split()] for ln in lines[at + 1:at + 1 + rows]]
        blocks[name].append(np.array(data).reshape(rows, cols))
        at += 1 + rows
    return GcnModel(variant=header["variant"], k=int(header["k"]),
                    hidden=int(header["hidden"]), seed=int(header["seed"]),
                    w0=blocks["w0"], w1=blocks["w1"])


def write_loss_trace_csv(path, losses: list[float]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("epoch,loss\n")
        for epoch, loss in enumerate(losses):
            fh.write(f"{epoch},{loss!r}\n")
