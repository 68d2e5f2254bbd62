"""Interchangeable segmentation strategies.

The picking cascade only needs a curvature-probability map per gather; where
it comes from is pluggable: the label-mask oracle (optionally blurred to
mimic a diffuse network output), a non-learned threshold baseline, or an
externally produced CIGR raster (e.g. from the segmentation network
component).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .features import FeatureStack
from .gridio import GridIOError, SegMap, read_raster
from .synthgen import LabelMask

# 8-connectivity structuring element shared with the extraction stage.
CONN8 = np.ones((3, 3), dtype=np.uint8)

SEG_SUFFIX = "_seg.cigr"
BASELINE_PERCENTILE = 80.0


@dataclass(frozen=True)
class SegmenterKind:
    """Which strategy to run: 'oracle', 'baseline', or 'external'."""

    name: str
    blur_sigma: float = 1.0      # oracle only
    threshold: float = 0.5       # baseline gating of the probability map
    external_dir: str | None = None

    def __post_init__(self):
        if self.name not in ("oracle", "baseline", "external"):
            raise ValueError(f"unknown segmenter {self.name!r}")
        if self.blur_sigma < 0:
            raise ValueError("blur_sigma must be >= 0")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")


def segment_oracle(mask: LabelMask, blur_sigma: float) -> SegMap:
    """Ground-truth segmentation: the label mask, optionally Gaussian-blurred.

    After blurring, each connected blob is renormalized to peak 1 so the
    downstream threshold keeps every event regardless of its blur spread.
    """
    values = mask.values.astype(np.float64)
    if blur_sigma == 0:
        return SegMap(values)
    blurred = ndimage.gaussian_filter(values, sigma=blur_sigma)
    support = blurred > 1e-12
    labels, n = ndimage.label(support, structure=CONN8)
    if n:
        peaks = ndimage.maximum(blurred, labels=labels, index=np.arange(1, n + 1))
        scale = np.ones_like(blurred)
        scale[support] = peaks[labels[support] - 1]
        blurred = blurred / scale
    return SegMap(blurred)


def segment_baseline(stack: FeatureStack) -> SegMap:
    """Non-learned fallback: local peaks gated by strong filtered amplitude.

    The gate uses the band-pass channel because the AGC channels are
    deliberately scale-flattened (everything sits near unit amplitude),
    which leaves no contrast between event crests and quiet regions.
    """
    strength = np.abs(stack.bandpass)
    gate = strength > np.percentile(strength, BASELINE_PERCENTILE)
    return SegMap(((stack.peaks == 1) & gate).astype(np.float64))


def load_segmentation(path, expected_dims: tuple[int, int]) -> SegMap:
    """Load an externally produced probability map and validate it."""
    values = read_raster(path)
    if values.shape != tuple(expected_dims):
        raise GridIOError(
            f"{path}: segmentation dims {values.shape} != gather dims {expected_dims}"
        )
    if values.min() < -0.01 or values.max() > 1.01:
        raise GridIOError(
            f"{path}: values outside [0, 1]; not a segmentation map"
        )
    return SegMap(np.clip(values, 0.0, 1.0))


def external_map_path(gather_path) -> str:
    """Derive the external map file name by suffix substitution."""
    s = str(gather_path)
    if s.endswith(".cigr"):
        return s[: -len(".cigr")] + SEG_SUFFIX
    return s + SEG_SUFFIX
