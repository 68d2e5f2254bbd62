import numpy as np
import pytest

from rmopick.cluster import (
    cluster_curves,
    curve_distance,
    distance_matrix,
    local_slopes,
    mean_slope,
    merge_clusters,
    merge_group,
)
from rmopick.config import ClusterConfig
from rmopick.gridio import Curve


def _curve(pairs):
    return Curve.from_points(pairs)


def _random_curves(rng, n):
    curves = []
    for _ in range(n):
        length = int(rng.integers(1, 12))
        start = int(rng.integers(0, 80))
        offsets = np.arange(start, start + length)
        depths = rng.uniform(0, 200, size=length).astype(np.float32)
        curves.append(Curve(offsets, depths))
    return curves


def _brute_components(dist, d_eps):
    """Connected components of the <= d_eps graph by label propagation."""
    n = dist.shape[0]
    labels = list(range(n))
    changed = True
    while changed:
        changed = False
        for i in range(n):
            for j in range(n):
                if dist[i, j] <= d_eps and labels[j] != labels[i]:
                    target = min(labels[i], labels[j])
                    if labels[i] != target or labels[j] != target:
                        labels[i] = labels[j] = target
                        changed = True
    groups = {}
    for i, lab in enumerate(labels):
        groups.setdefault(lab, []).append(i)
    return {frozenset(g) for g in groups.values()}


def test_local_slopes_linear_curve():
    curve = _curve([(o, 2 * o + 7) for o in range(30)])
    for mo, md, s in local_slopes(curve, 11, 5):
        assert s == pytest.approx(2.0, abs=1e-6)
        assert md == pytest.approx(2 * mo + 7, abs=1e-4)


def test_local_slopes_horizontal():
    curve = _curve([(o, 50.0) for o in range(20)])
    slopes = [s for _, _, s in local_slopes(curve, 5, 3)]
    assert slopes == pytest.approx([0.0] * len(slopes))


def test_local_slopes_hand_value():
    curve = _curve([(0, 0.0), (1, 1.0), (2, 4.0)])
    (out,) = local_slopes(curve, 3, 3)
    # n*sum(od) - sum(o)*sum(d) over n*sum(o^2) - sum(o)^2 = (27-15)/(15-9)
    assert out[2] == pytest.approx(2.0)
    assert out[0] == pytest.approx(1.0)
    assert out[1] == pytest.approx(5.0 / 3.0)


def test_local_slopes_short_curve():
    assert local_slopes(_curve([(0, 1.0)]), 5, 2) == []
    out = local_slopes(_curve([(0, 1.0), (1, 3.0)]), 5, 2)
    assert len(out) == 1 and out[0][2] == pytest.approx(2.0)


def test_local_slopes_window_layout():
    curve = _curve([(o, float(o)) for o in range(25)])
    wins = local_slopes(curve, 11, 5)
    # starts 0, 5, 10, 15 (tail window has 10 points)
    assert len(wins) == 4


def test_mean_slope_single_point():
    assert mean_slope(_curve([(4, 9.0)]), ClusterConfig()) == 0.0


def test_distance_coincident_single_points():
    cfg = ClusterConfig()
    a = _curve([(5, 10.0)])
    b = _curve([(5, 10.0)])
    assert curve_distance(a, b, cfg) == 0.0


def test_distance_horizontal_segments_hand_value():
    cfg = ClusterConfig(alpha=0.5, w_offset=1.5, w_depth=1.0)
    c1 = _curve([(o, 50.0) for o in range(0, 6)])       # right end (5, 50)
    c2 = _curve([(o, 50.0) for o in range(7, 13)])      # left end (7, 50)
    # slopes both 0; endpoint gap (-2, 0) weighted (-3, 0)
    assert curve_distance(c1, c2, cfg) == pytest.approx(1.5)


def test_distance_symmetry_random():
    cfg = ClusterConfig()
    rng = np.random.default_rng(12)
    curves = _random_curves(rng, 12)
    for i in range(len(curves)):
        for j in range(len(curves)):
            a = curve_distance(curves[i], curves[j], cfg)
            b = curve_distance(curves[j], curves[i], cfg)
            assert a == pytest.approx(b)
            assert a >= 0.0


def test_distance_invariant_under_common_depth_shift():
    cfg = ClusterConfig()
    rng = np.random.default_rng(13)
    for _ in range(20):
        c1, c2 = _random_curves(rng, 2)
        d0 = curve_distance(c1, c2, cfg)
        shift = 17.25
        c1s = Curve(c1.offsets, c1.depths + np.float32(shift))
        c2s = Curve(c2.offsets, c2.depths + np.float32(shift))
        assert curve_distance(c1s, c2s, cfg) == pytest.approx(d0, abs=1e-3)


def test_distance_rejects_empty():
    with pytest.raises(ValueError):
        curve_distance(_curve([]), _curve([(0, 1.0)]), ClusterConfig())


def test_cluster_all_far_apart():
    cfg = ClusterConfig(d_eps=4.0)
    curves = [_curve([(0, 0.0)]), _curve([(50, 100.0)]), _curve([(90, 200.0)])]
    assert cluster_curves(curves, cfg) == [[0], [1], [2]]


def test_cluster_chain_density_connectivity():
    # gaps of 2 columns between flat segments: pairwise distance 1.5 < 4
    cfg = ClusterConfig(alpha=0.5, d_eps=4.0)
    a = _curve([(o, 50.0) for o in range(0, 5)])
    b = _curve([(o, 50.0) for o in range(7, 12)])
    c = _curve([(o, 50.0) for o in range(14, 19)])
    dist = distance_matrix([a, b, c], cfg)
    assert dist[0, 1] < 4.0 < dist[0, 2]
    assert cluster_curves([a, b, c], cfg) == [[0, 1, 2]]


def test_cluster_empty():
    assert cluster_curves([], ClusterConfig()) == []


def test_cluster_min_pts_noise_as_singletons():
    cfg = ClusterConfig(d_eps=4.0, n_min_pts=3)
    a = _curve([(o, 50.0) for o in range(0, 5)])
    b = _curve([(o, 200.0) for o in range(50, 55)])
    groups = cluster_curves([a, b], cfg)
    assert sorted(map(tuple, groups)) == [(0,), (1,)]


def test_cluster_matches_brute_force_components():
    rng = np.random.default_rng(14)
    cfg = ClusterConfig(d_eps=4.0)
    for _ in range(200):
        curves = _random_curves(rng, int(rng.integers(1, 11)))
        got = {frozenset(g) for g in cluster_curves(curves, cfg)}
        dist = distance_matrix(curves, cfg)
        assert got == _brute_components(dist, cfg.d_eps)


def test_merge_disjoint_ranges_concatenates():
    a = _curve([(0, 1.0), (1, 2.0)])
    b = _curve([(5, 3.0), (6, 4.0)])
    merged = merge_group([a, b])
    assert merged.offsets.tolist() == [0, 1, 5, 6]


def test_merge_identical_is_idempotent():
    a = _curve([(0, 1.0), (1, 2.0), (2, 3.0)])
    assert merge_group([a, a]) == a


def test_merge_overlap_averages():
    a = _curve([(3, 10.0)])
    b = _curve([(3, 12.0)])
    merged = merge_group([a, b])
    assert merged.depths[0] == pytest.approx(11.0)


def test_merge_point_count_bounded():
    rng = np.random.default_rng(15)
    for _ in range(30):
        curves = _random_curves(rng, 4)
        merged = merge_group(curves)
        assert len(merged) <= sum(len(c) for c in curves)
        assert np.all(np.diff(merged.offsets) > 0)


def test_merge_clusters_composition():
    cfg = ClusterConfig(alpha=0.5, d_eps=4.0)
    a = _curve([(o, 50.0) for o in range(0, 5)])
    b = _curve([(o, 50.0) for o in range(7, 12)])
    merged = merge_clusters([a, b], cfg)
    assert len(merged) == 1
    assert merged[0].offsets.tolist() == list(range(0, 5)) + list(range(7, 12))
