"""Dense graph operators for spectral convolution.

Everything works on the symmetrized adjacency matrix of a snapshot (or
clustered) graph: an edge in either direction makes A_ij = A_ji
nonzero. The default adjacency is binary; flow-count weights are only
used when explicitly requested, in which case the two directions'
weights are summed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_POWER_TOL = 1e-6
_POWER_MAX_ITER = 1000
_LAMBDA_MAX_FALLBACK = 2.0


def adjacency_matrix(graph, *, weighted: bool = False) -> np.ndarray:
    """Symmetrized n x n adjacency; binary unless weighted is true."""
    n = graph.n_nodes
    a = np.zeros((n, n))
    for src, dst, w in graph.edges:
        if weighted:
            a[src, dst] += w
            if src != dst:
                a[dst, src] += w
        else:
            a[src, dst] = 1.0
            a[dst, src] = 1.0
    return a


def renormalize_adjacency(a: np.ndarray) -> np.ndarray:
    """D^(-1/2) (A + I) D^(-1/2) with D the degree of A + I.

    The added self-loops keep every row stochastic-normalizable, so the
    spectrum stays within [-1, 1] and repeated application cannot blow
    activations up.
    """
    a_tilde = a + np.eye(len(a))
    inv_sqrt = 1.0 / np.sqrt(a_tilde.sum(axis=1))
    return a_tilde * inv_sqrt[:, None] * inv_sqrt[None, :]


def normalize_renormalized(graph, *, weighted: bool = False) -> np.ndarray:
    return renormalize_adjacency(adjacency_matrix(graph, weighted=weighted))


def normalized_laplacian(a: np.ndarray) -> np.ndarray:
    """Symmetric normalized Laplacian I - D^(-1/2) A D^(-1/2).

    Degree-0 rows use the convention that the D^(-1/2) factor and the
    identity entry are both 0, so an isolated node contributes an
    all-zero row instead of a division by zero.
    """
    degree = a.sum(axis=1)
    connected = degree > 0
    inv_sqrt = np.where(connected, 1.0 / np.sqrt(np.where(connected, degree, 1.0)), 0.0)
    lap = -(a * inv_sqrt[:, None] * inv_sqrt[None, :])
    lap[np.diag_indices_from(lap)] += connected.astype(float)
    return lap


@dataclass
class ScaledLaplacian:
    """L rescaled to (2/lambda_max) L - I so its spectrum fits [-1, 1]."""

    matrix: np.ndarray
    lambda_max: float


def _power_iteration_lambda_max(lap: np.ndarray) -> float | None:
    """Largest eigenvalue of a PSD matrix, or None when it cannot converge."""
    rng = np.random.default_rng(0)
    v = rng.standard_normal(len(lap))
    v /= np.linalg.norm(v)
    previous = np.inf
    for _ in range(_POWER_MAX_ITER):
        w = lap @ v
        estimate = float(v @ w)  # Rayleigh quotient, v is unit length
        norm = np.linalg.norm(w)
        if not np.isfinite(norm) or norm == 0.0:
            return None
        v = w / norm
        if abs(estimate - previous) <= _POWER_TOL:
            return estimate
        previous = estimate
    return None


def scale_laplacian(lap: np.ndarray) -> ScaledLaplacian:
    lambda_max = _power_iteration_lambda_max(lap)
    if lambda_max is None or lambda_max <= 1e-8:
        # no convergence, or an (all but) edgeless graph whose top
        # eigenvalue is numerically zero
        lambda_max = _LAMBDA_MAX_FALLBACK
    matrix = (2.0 / lambda_max) * lap - np.eye(len(lap))
    return ScaledLaplacian(matrix=matrix, lambda_max=lambda_max)


def scaled_laplacian(graph, *, weighted: bool = False) -> ScaledLaplacian:
    return scale_laplacian(normalized_laplacian(adjacency_matrix(graph, weighted=weighted)))


def chebyshev_basis(l_tilde: np.ndarray, x: np.ndarray, k: int) -> list[np.ndarray]:
    """[T_0 x, ..., T_k x] via T_j x = 2 L~ T_{j-1} x - T_{j-2} x."""
    if k < 0:
        raise ValueError(f"polynomial order must be >= 0, got {k}")
    out = [x]
    if k >= 1:
        out.append(l_tilde @ x)
    for _ in range(2, k + 1):
        out.append(2.0 * (l_tilde @ out[-1]) - out[-2])
    return out


def union_matrices(graphs, *, weighted: bool = False):
    """Block-diagonal adjacency plus stacked features and labels.

    Disconnected union of the given graphs: node i of graph g lands at
    offset(g) + i, no edges are added between blocks.
    """
    sizes = [g.n_nodes for g in graphs]
    total = sum(sizes)
    a = np.zeros((total, total))
    features, labels = [], []
    offset = 0
    for g, n in zip(graphs, sizes):
        a[offset:offset + n, offset:offset + n] = adjacency_matrix(g, weighted=weighted)
        features.append(np.stack([node.features for node in g.nodes]))
        labels.append(g.node_labels())
        offset += n
    x = np.vstack(features) if features else np.zeros((0, 0))
    y = np.concatenate(labels) if labels else np.zeros(0, dtype=np.int64)
    return a, x, y
