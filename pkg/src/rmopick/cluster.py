"""Stage 3: merge preliminary curves that belong to one physical event.

Curves are compared with a mixed distance combining mean-slope difference
and the anisotropically weighted gap between facing endpoints; density-based
clustering on the resulting distance matrix groups fragments, which are then
merged into single curves.
"""

from __future__ import annotations

import numpy as np

from .config import ClusterConfig
from .gridio import Curve


def local_slopes(curve: Curve, slope_win: int, slope_stride: int):
    """Windowed least-squares slopes along a curve.

    Windows of `slope_win` consecutive points advance by `slope_stride`;
    a shorter final window is kept when it still has >= 2 points.  Returns
    a list of (mean_offset, mean_depth, slope) triples; curves with fewer
    than 2 points yield [].
    """
    if slope_win < 2 or slope_stride < 1:
        raise ValueError("need slope_win >= 2 and slope_stride >= 1")
    o = curve.offsets.astype(np.float64)
    d = curve.depths.astype(np.float64)
    n = o.size
    if n < 2:
        return []
    out = []
    start = 0
    while start < n:
        wo = o[start : start + slope_win]
        wd = d[start : start + slope_win]
        if wo.size >= 2:
            m = wo.size
            denom = m * np.sum(wo * wo) - np.sum(wo) ** 2
            slope = (m * np.sum(wo * wd) - np.sum(wo) * np.sum(wd)) / denom
            out.append((float(wo.mean()), float(wd.mean()), float(slope)))
        if start + slope_win >= n:
            break
        start += slope_stride
    return out


def mean_slope(curve: Curve, config: ClusterConfig) -> float:
    """Average of the windowed local slopes; single-point curves count as 0."""
    slopes = local_slopes(curve, config.slope_win, config.slope_stride)
    if not slopes:
        return 0.0
    return float(np.mean([s for _, _, s in slopes]))


def _endpoint_gap(c1: Curve, c2: Curve, w_offset: float, w_depth: float) -> float:
    r1, l1 = np.array(c1.right), np.array(c1.left)
    r2, l2 = np.array(c2.right), np.array(c2.left)
    w = np.array([w_offset, w_depth])
    gap_a = np.linalg.norm((r1 - l2) * w)
    gap_b = np.linalg.norm((l1 - r2) * w)
    return float(min(gap_a, gap_b))


def curve_distance(c1: Curve, c2: Curve, config: ClusterConfig) -> float:
    """Mixed distance: alpha * slope difference + (1-alpha) * endpoint gap."""
    if len(c1) == 0 or len(c2) == 0:
        raise ValueError("curves must be non-empty")
    s1 = mean_slope(c1, config)
    s2 = mean_slope(c2, config)
    gap = _endpoint_gap(c1, c2, config.w_offset, config.w_depth)
    return config.alpha * abs(s1 - s2) + (1.0 - config.alpha) * gap


def distance_matrix(curves, config: ClusterConfig) -> np.ndarray:
    n = len(curves)
    slopes = [mean_slope(c, config) for c in curves]
    dist = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            gap = _endpoint_gap(curves[i], curves[j], config.w_offset, config.w_depth)
            d = config.alpha * abs(slopes[i] - slopes[j]) + (1.0 - config.alpha) * gap
            dist[i, j] = dist[j, i] = d
    return dist


def cluster_curves(curves, config: ClusterConfig) -> list[list[int]]:
    """Density-based grouping on the precomputed mixed-distance matrix.

    A curve is a core point when at least n_min_pts curves (itself included)
    lie within d_eps; clusters grow through core points only.  With
    n_min_pts=1 every curve is core and the result is exactly the connected
    components of the <= d_eps graph.  Non-core curves unreachable from any
    core survive as singleton groups so no pick is silently dropped.
    """
    n = len(curves)
    if n == 0:
        return []
    dist = distance_matrix(curves, config)
    neighbors = [np.flatnonzero(dist[i] <= config.d_eps) for i in range(n)]
    core = [len(nb) >= config.n_min_pts for nb in neighbors]
    assigned = np.full(n, -1, dtype=np.int64)
    groups: list[list[int]] = []
    for i in range(n):
        if assigned[i] >= 0 or not core[i]:
            continue
        gid = len(groups)
        queue = [i]
        assigned[i] = gid
        members = []
        while queue:
            cur = queue.pop(0)
            members.append(cur)
            if not core[cur]:
                continue
            for j in neighbors[cur]:
                if assigned[j] < 0:
                    assigned[j] = gid
                    queue.append(j)
        groups.append(sorted(members))
    for i in range(n):  # noise curves stay as singletons
        if assigned[i] < 0:
            groups.append([i])
    return groups


def merge_group(curves) -> Curve:
    """Union of member points ordered by offset; shared offsets average."""
    per_offset: dict[int, list[float]] = {}
    for curve in curves:
        for o, d in curve.points():
            per_offset.setdefault(int(o), []).append(float(d))
    points = [(o, float(np.mean(ds))) for o, ds in sorted(per_offset.items())]
    return Curve.from_points(points)


def merge_clusters(curves, config: ClusterConfig) -> list[Curve]:
    """Cluster then merge; returns one curve per group."""
    groups = cluster_curves(curves, config)
    return [merge_group([curves[i] for i in g]) for g in groups]
