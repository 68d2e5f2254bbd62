"""Pick-quality metrics: semblance, track rate, slope-field MSE.

Semblance needs only the gather; track rate and slope-field MSE compare an
automatic pick set against a reference (manual or ground-truth) set.
"""

from __future__ import annotations

import math

import numpy as np

from .config import PipelineConfig
from .gridio import Curve, Gather, SlopeField
from .refine import pooled_slope_samples, slope_field


def semblance(gather: Gather, curve: Curve, h_s: int) -> float:
    """Coherence of the gather along a curve within a +-h_s depth window.

    Fractional depths round to the nearest sample; windows clamp at the
    raster edges.  Returns 0 for a zero denominator.
    """
    if len(curve) == 0:
        raise ValueError("semblance of an empty curve")
    g = gather.amplitudes.astype(np.float64)
    rows = np.rint(curve.depths.astype(np.float64)).astype(np.int64)
    cols = curve.offsets
    offsets_m = np.arange(-h_s, h_s + 1)[:, None]
    idx = np.clip(rows[None, :] + offsets_m, 0, gather.n_depth - 1)
    vals = g[idx, np.broadcast_to(cols, idx.shape)]
    num = float((vals.sum(axis=1) ** 2).sum())
    den = float(len(curve) * (vals**2).sum())
    if den == 0.0:
        return 0.0
    return num / den


def mean_semblance(gather: Gather, curves, h_s: int) -> float:
    """Average semblance over a pick set; 0.0 for an empty set."""
    if not curves:
        return 0.0
    return float(np.mean([semblance(gather, c, h_s) for c in curves]))


def curve_error(auto: Curve, manual: Curve) -> float:
    """Mean absolute depth error over shared offsets; inf when disjoint."""
    if len(auto) == 0 or len(manual) == 0:
        raise ValueError("curves must be non-empty")
    common, ia, im = np.intersect1d(auto.offsets, manual.offsets,
                                    return_indices=True)
    if common.size == 0:
        return math.inf
    diff = auto.depths[ia].astype(np.float64) - manual.depths[im].astype(np.float64)
    return float(np.mean(np.abs(diff)))


def track_rate(autos, manuals, d_t: float) -> float:
    """Fraction of reference curves matched by some auto curve within d_t."""
    if not manuals:
        return 1.0
    hits = 0
    for m in manuals:
        if any(curve_error(a, m) < d_t for a in autos):
            hits += 1
    return hits / len(manuals)


def slope_mse(autos, manuals, config: PipelineConfig,
              dims: tuple[int, int]) -> float:
    """Mean squared difference of the two pick sets' slope fields."""
    field_a = _field_or_zero(autos, config, dims)
    field_m = _field_or_zero(manuals, config, dims)
    return float(np.mean((field_a.values - field_m.values) ** 2))


def _field_or_zero(curves, config: PipelineConfig, dims) -> SlopeField:
    samples = pooled_slope_samples(curves, config)
    if not samples:
        n_depth, n_offset = dims
        r = config.refine
        shape = (max(1, -(-n_offset // r.cell_offset)),
                 max(1, -(-n_depth // r.cell_depth)))
        return SlopeField(np.zeros(shape), r.cell_offset, r.cell_depth, r.h_prior)
    return slope_field(samples, config.refine, dims)


REPORT_HEADER = "gather,n_auto,n_manual,semblance,track_rate,slope_mse"


def report_rows(entries, config: PipelineConfig):
    """Per-gather metric rows plus an aggregate mean row.

    `entries` is a sequence of (name, gather, autos, manuals).  Returns a
    list of dict rows; the final row aggregates with name 'ALL'.
    """
    rows = []
    for name, gather, autos, manuals in entries:
        rows.append({
            "gather": name,
            "n_auto": len(autos),
            "n_manual": len(manuals),
            "semblance": mean_semblance(gather, autos, config.metric.h_s),
            "track_rate": track_rate(autos, manuals, config.metric.d_t),
            "slope_mse": slope_mse(autos, manuals, config,
                                   (gather.n_depth, gather.n_offset)),
        })
    if rows:
        rows.append({
            "gather": "ALL",
            "n_auto": sum(r["n_auto"] for r in rows),
            "n_manual": sum(r["n_manual"] for r in rows),
            "semblance": float(np.mean([r["semblance"] for r in rows])),
            "track_rate": float(np.mean([r["track_rate"] for r in rows])),
            "slope_mse": float(np.mean([r["slope_mse"] for r in rows])),
        })
    return rows


def format_report(rows) -> str:
    lines = [REPORT_HEADER]
    for r in rows:
        lines.append(
            f"{r['gather']},{r['n_auto']},{r['n_manual']},"
            f"{r['semblance']:.6f},{r['track_rate']:.6f},{r['slope_mse']:.8f}"
        )
    return "\n".join(lines) + "\n"


def report(entries, config: PipelineConfig) -> str:
    """Formatted metric table for a batch of gathers."""
    return format_report(report_rows(entries, config))
