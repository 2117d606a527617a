"""DBSCAN on dense points, exact and deterministic.

Neighborhoods are closed euclidean balls that include the query point,
so min_pts=2 means "at least one other point within eps". Clusters are
the connected components of core points under mutual eps-reachability;
a border point (non-core within eps of some core) joins the cluster of
the lowest-index core point inside its eps-ball. Remaining points are
noise. Cluster ids are dense from 0 in ascending order of each
cluster's lowest core index.
"""

from __future__ import annotations

import numpy as np

from . import NOISE, ClusterResult

_BLOCK = 256


def _distance_rows(points: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Euclidean distances from points[idx] to all points, one row each."""
    diff = points[idx, None, :] - points[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2))


def neighbor_counts(points: np.ndarray, eps: float) -> np.ndarray:
    """|closed eps-ball| per point, computed in row blocks."""
    n = len(points)
    counts = np.zeros(n, dtype=np.int64)
    for lo in range(0, n, _BLOCK):
        idx = np.arange(lo, min(lo + _BLOCK, n))
        counts[idx] = (_distance_rows(points, idx) <= eps).sum(axis=1)
    return counts


def dbscan(points: np.ndarray, eps: float, min_pts: int) -> ClusterResult:
    points = np.asarray(points, dtype=np.float64)
    n = len(points)
    if n == 0:
        return ClusterResult.empty()

    core = neighbor_counts(points, eps) >= min_pts
    labels = np.full(n, NOISE, dtype=np.int64)

    # Grow one component per unlabeled core, scanning starts in index
    # order; each core point's distance row is computed exactly once.
    cluster_count = 0
    for start in range(n):
        if not core[start] or labels[start] != NOISE:
            continue
        cid = cluster_count
        cluster_count += 1
        labels[start] = cid
        stack = [start]
        while stack:
            p = stack.pop()
            row = np.sqrt(((points - points[p]) ** 2).sum(axis=1))
            reachable = np.flatnonzero((row <= eps) & core & (labels == NOISE))
            labels[reachable] = cid
            stack.extend(reachable.tolist())

    # Border assignment: lowest-index core within eps.
    for p in np.flatnonzero(~core):
        row = np.sqrt(((points - points[p]) ** 2).sum(axis=1))
        cores_in_reach = np.flatnonzero((row <= eps) & core)
        if cores_in_reach.size:
            labels[p] = labels[cores_in_reach[0]]

    return ClusterResult(assignment=labels, cluster_count=cluster_count)
