"""Spectral graph convolution for node-behaviour classification."""

from .graph_ops import (
    ScaledLaplacian,
    adjacency_matrix,
    chebyshev_basis,
    normalize_renormalized,
    normalized_laplacian,
    renormalize_adjacency,
    scale_laplacian,
    scaled_laplacian,
    union_matrices,
)
from .model import (
    N_CLASSES,
    N_INPUT,
    VARIANT_CHEBYSHEV,
    VARIANT_RENORMALIZED,
    EvalMetrics,
    GcnModel,
    TrainConfig,
    build_operator,
    evaluate,
    forward,
    gradient_check,
    init_model,
    inverse_frequency_weights,
    load_model,
    loss_and_grads,
    save_model,
    train,
    write_loss_trace_csv,
)

__all__ = [
    "N_CLASSES",
    "N_INPUT",
    "VARIANT_CHEBYSHEV",
    "VARIANT_RENORMALIZED",
    "EvalMetrics",
    "GcnModel",
    "ScaledLaplacian",
    "TrainConfig",
    "adjacency_matrix",
    "build_operator",
    "chebyshev_basis",
    "evaluate",
    "forward",
    "gradient_check",
    "init_model",
    "inverse_frequency_weights",
    "load_model",
    "loss_and_grads",
    "normalize_renormalized",
    "normalized_laplacian",
    "renormalize_adjacency",
    "save_model",
    "scale_laplacian",
    "scaled_laplacian",
    "train",
    "union_matrices",
    "write_loss_trace_csv",
]
