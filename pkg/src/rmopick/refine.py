"""Stage 4: slope-field prior and slope-constrained local regression.

Local slopes sampled from all merged curves are kernel-smoothed into a
global slope field (Nadaraya-Watson weights).  Each curve point is then
re-fit by locally weighted linear regression with a quadratic penalty
pulling the fitted slope toward the field value at that point, and curves
shorter than a minimum length are discarded.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .cluster import local_slopes, merge_clusters
from .config import PipelineConfig, RefineConfig
from .extract import extract_all
from .gridio import Curve, SegMap, SlopeField


class SingularRefineWarning(UserWarning):
    """Regression system was singular; the input depth was kept."""


def slope_field(samples, config: RefineConfig, dims: tuple[int, int]) -> SlopeField:
    """Kernel-weighted slope field over a raster of `dims` (n_depth, n_offset).

    `samples` is a sequence of (mean_offset, mean_depth, slope) triples.
    Cell values are the kernel-weight-normalized average of sample slopes;
    cells with vanishing total weight copy the nearest sample's slope.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("slope field needs at least one sample")
    n_depth, n_offset = dims
    n_oc = max(1, -(-n_offset // config.cell_offset))
    n_dc = max(1, -(-n_depth // config.cell_depth))
    so = np.array([s[0] for s in samples])
    sd = np.array([s[1] for s in samples])
    ss = np.array([s[2] for s in samples])

    oc = (np.arange(n_oc) + 0.5) * config.cell_offset - 0.5
    dc = (np.arange(n_dc) + 0.5) * config.cell_depth - 0.5
    do = oc[:, None] - so[None, :]
    dd = dc[:, None] - sd[None, :]
    dist2 = do[:, None, :] ** 2 + dd[None, :, :] ** 2  # (n_oc, n_dc, n_samples)
    weights = np.exp(-dist2 / (2.0 * config.h_prior**2))
    wsum = weights.sum(axis=2)
    values = np.zeros((n_oc, n_dc))
    ok = wsum >= 1e-12
    values[ok] = (weights @ ss)[ok] / wsum[ok]
    if not ok.all():
        nearest = dist2.argmin(axis=2)
        values[~ok] = ss[nearest[~ok]]
    return SlopeField(values, config.cell_offset, config.cell_depth, config.h_prior)


def refine_point(curve: Curve, o_star: float, d_star: float,
                 field: SlopeField, config: RefineConfig) -> float:
    """Regressed depth at o_star from the curve's own points.

    Minimizes the kernel-weighted squared residual of a local line plus
    lam / (2 h_para^2) * (slope - prior)^2, with the prior read from the
    slope field at (o_star, d_star).  Solved in offsets centered at o_star
    (the prediction and the slope penalty are invariant; conditioning is
    not).  A singular system (single point with lam = 0) keeps d_star and
    emits SingularRefineWarning.
    """
    if len(curve) == 0:
        raise ValueError("cannot refine an empty curve")
    u = curve.offsets.astype(np.float64) - o_star
    depths = curve.depths.astype(np.float64)
    m = field.lookup(o_star, d_star)
    lam_eff = config.lam / (2.0 * config.h_para**2)
    w = np.exp(-(u**2) / (2.0 * config.h_data**2))
    a11 = w.sum()
    a12 = (w * u).sum()
    a22 = (w * u * u).sum() + lam_eff
    b1 = (w * depths).sum()
    b2 = (w * u * depths).sum() + lam_eff * m
    det = a11 * a22 - a12 * a12
    scale = max(abs(a11 * a22), a12 * a12, 1e-300)
    if not np.isfinite(det) or abs(det) <= 1e-12 * scale:
        warnings.warn("singular regression system; keeping input depth",
                      SingularRefineWarning, stacklevel=2)
        return float(d_star)
    # prediction at u = 0 is the centered intercept
    return float((b1 * a22 - b2 * a12) / det)


def refine_curve(curve: Curve, field: SlopeField, config: RefineConfig) -> Curve:
    """Refine every point of a curve independently; offsets unchanged."""
    new_depths = [
        refine_point(curve, float(o), float(d), field, config)
        for o, d in curve.points()
    ]
    return Curve(curve.offsets, np.asarray(new_depths, dtype=np.float32))


def filter_short(curves, n_min: int):
    """Drop curves with fewer than n_min points; order preserved."""
    return [c for c in curves if len(c) >= n_min]


@dataclass(frozen=True)
class PickResult:
    """Curves after each post-processing stage, for diagnostics."""

    raw: list
    merged: list
    refined: list
    final: list
    field: SlopeField | None

    @property
    def counts(self) -> dict:
        return {
            "raw": len(self.raw),
            "merged": len(self.merged),
            "final": len(self.final),
        }


def pooled_slope_samples(curves, config: PipelineConfig):
    samples = []
    for c in curves:
        samples.extend(
            local_slopes(c, config.cluster.slope_win, config.cluster.slope_stride)
        )
    return samples


def pick_stages(segmap: SegMap, config: PipelineConfig) -> PickResult:
    """Run stages 2-4 on a segmentation map, keeping per-stage outputs."""
    dims = (segmap.n_depth, segmap.n_offset)
    raw = extract_all(segmap, config.t_seg)
    merged = merge_clusters(raw, config.cluster)
    samples = pooled_slope_samples(merged, config)
    if samples:
        field = slope_field(samples, config.refine, dims)
        refined = [refine_curve(c, field, config.refine) for c in merged]
    else:
        # nothing to regress against (at most single-point curves)
        field = None
        refined = list(merged)
    final = filter_short(refined, config.refine.n_min)
    return PickResult(raw, merged, refined, final, field)


def pick_pipeline(segmap: SegMap, config: PipelineConfig) -> list[Curve]:
    """Segmentation map in, final picked curves out."""
    return pick_stages(segmap, config).final
