"""Brute-force reference implementations used by the tests.

Everything here favors obviousness over speed: full distance matrices,
explicit component searches, eigendecompositions. The production code
must agree with these on small inputs.
"""

from __future__ import annotations

import numpy as np

NOISE = -1


def distance_matrix(points: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2))


def dbscan_oracle(points: np.ndarray, eps: float, min_pts: int):
    """Reachability-closure DBSCAN over the full distance matrix.

    Core points: closed eps-ball (self included) holds >= min_pts
    points. Clusters are connected components of cores, ids assigned in
    ascending order of each component's lowest core index. A border
    point joins the cluster of the lowest-index core inside its ball.
    """
    n = len(points)
    if n == 0:
        return np.zeros(0, dtype=np.int64), 0
    d = distance_matrix(points)
    core = (d <= eps).sum(axis=1) >= min_pts
    labels = np.full(n, NOISE, dtype=np.int64)

    cluster_count = 0
    for start in range(n):
        if not core[start] or labels[start] != NOISE:
            continue
        labels[start] = cluster_count
        stack = [start]
        while stack:
            p = stack.pop()
            for q in range(n):
                if core[q] and labels[q] == NOISE and d[p, q] <= eps:
                    labels[q] = cluster_count
                    stack.append(q)
        cluster_count += 1

    for p in range(n):
        if not core[p]:
            for q in range(n):
                if core[q] and d[p, q] <= eps:
                    labels[p] = labels[q]
                    break
    return labels, cluster_count


def mutual_reachability_matrix(points: np.ndarray, min_pts: int) -> np.ndarray:
    d = distance_matrix(points)
    core = np.sort(d, axis=1)[:, min_pts - 1]
    return np.maximum(np.maximum.outer(core, core), d)


def mst_weight_oracle(points: np.ndarray, min_pts: int) -> float:
    """Total MST weight over the mutual-reachability graph, via Kruskal.

    Every minimum spanning tree of a graph has the same total weight,
    so the total is comparable across MST algorithms.
    """
    n = len(points)
    mr = mutual_reachability_matrix(points, min_pts)
    edges = sorted(
        (mr[i, j], i, j) for i in range(n) for j in range(i + 1, n)
    )
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    total = 0.0
    accepted = 0
    for w, i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            total += w
            accepted += 1
            if accepted == n - 1:
                break
    return total


def chebyshev_eig_oracle(l_tilde: np.ndarray, x: np.ndarray, j: int) -> np.ndarray:
    """T_j(L~) x computed through the eigendecomposition U T_j(D) U^T x."""
    lam, u = np.linalg.eigh(l_tilde)
    t_prev = np.ones_like(lam)
    if j == 0:
        t = t_prev
    else:
        t = lam.copy()
        for _ in range(2, j + 1):
            t_prev, t = t, 2.0 * lam * t - t_prev
    return (u * t) @ (u.T @ x)
