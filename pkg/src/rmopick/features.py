"""Trace-wise feature extraction: AGC, band-pass, local-peak mask.

The four channels stacked here feed the segmentation stage.  Traces run
along the depth axis, i.e. one trace is one gather column.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import FeatureConfig
from .gridio import Gather, write_raster

FEATURE_SUFFIXES = ("agc1", "agc2", "bandpass", "peaks")


@dataclass(frozen=True)
class FeatureStack:
    """Channels [agc1, agc2, bandpass, peaks], each shaped like the gather."""

    agc1: np.ndarray
    agc2: np.ndarray
    bandpass: np.ndarray
    peaks: np.ndarray

    def __post_init__(self):
        shape = self.agc1.shape
        for name in ("agc2", "bandpass", "peaks"):
            if getattr(self, name).shape != shape:
                raise ValueError("feature channels must share the gather shape")
        if not np.isin(self.peaks, (0, 1)).all():
            raise ValueError("peaks channel must be binary")

    def channels(self):
        return (self.agc1, self.agc2, self.bandpass, self.peaks)

    def as_array(self) -> np.ndarray:
        """(4, n_depth, n_offset) float32 tensor in fixed channel order."""
        return np.stack([c.astype(np.float32) for c in self.channels()])

    def save(self, basepath) -> None:
        """Export the four channels as CIGR rasters `<base>_<channel>.cigr`."""
        for name, chan in zip(FEATURE_SUFFIXES, self.channels()):
            write_raster(chan.astype(np.float32), f"{basepath}_{name}.cigr")


def agc_trace(trace, h: int, epsilon: float):
    """Automatic gain control: divide by the trailing-window RMS.

    The window at sample t covers [t-h+1, t]; before the window fills, the
    mean square runs over the available prefix [0, t].
    """
    x = np.asarray(trace, dtype=np.float64)
    if x.size == 0:
        raise ValueError("empty trace")
    if h < 1:
        raise ValueError("window length must be >= 1")
    csum = np.cumsum(x**2)
    window = csum.copy()
    if h < x.size:
        window[h:] = csum[h:] - csum[:-h]
    count = np.minimum(np.arange(1, x.size + 1), h)
    energy = window / count
    return x / (np.sqrt(energy) + epsilon)


def agc_gather(amplitudes, h: int, epsilon: float):
    """AGC applied independently to every trace (column)."""
    a = np.asarray(amplitudes, dtype=np.float64)
    csum = np.cumsum(a**2, axis=0)
    window = csum.copy()
    if h < a.shape[0]:
        window[h:] = csum[h:] - csum[:-h]
    count = np.minimum(np.arange(1, a.shape[0] + 1), h)[:, None]
    energy = window / count
    return a / (np.sqrt(energy) + epsilon)


def bandpass_trace(trace, f_min: float, f_max: float):
    """Zero every Fourier bin outside [f_min, f_max] (per-sample frequency)."""
    if f_min >= f_max:
        raise ValueError("need f_min < f_max")
    x = np.asarray(trace, dtype=np.float64)
    if x.size < 2:
        raise ValueError("trace too short for filtering")
    spec = np.fft.rfft(x)
    freqs = np.fft.rfftfreq(x.size, d=1.0)
    spec[(freqs < f_min) | (freqs > f_max)] = 0.0
    return np.fft.irfft(spec, n=x.size)


def bandpass_gather(amplitudes, f_min: float, f_max: float):
    if f_min >= f_max:
        raise ValueError("need f_min < f_max")
    a = np.asarray(amplitudes, dtype=np.float64)
    spec = np.fft.rfft(a, axis=0)
    freqs = np.fft.rfftfreq(a.shape[0], d=1.0)
    spec[(freqs < f_min) | (freqs > f_max), :] = 0.0
    return np.fft.irfft(spec, n=a.shape[0], axis=0)


def peak_mask(amplitudes):
    """1 where a sample strictly exceeds both depth neighbours; borders 0."""
    a = np.asarray(amplitudes)
    mask = np.zeros(a.shape, dtype=np.uint8)
    if a.shape[0] >= 3:
        interior = (a[1:-1] > a[:-2]) & (a[1:-1] > a[2:])
        mask[1:-1] = interior.astype(np.uint8)
    return mask


def feature_stack(gather: Gather, config: FeatureConfig) -> FeatureStack:
    """Build the 4-channel input tensor for segmentation."""
    a = gather.amplitudes
    return FeatureStack(
        agc1=agc_gather(a, config.h1, config.epsilon),
        agc2=agc_gather(a, config.h2, config.epsilon),
        bandpass=bandpass_gather(a, config.f_min, config.f_max),
        peaks=peak_mask(a),
    )
