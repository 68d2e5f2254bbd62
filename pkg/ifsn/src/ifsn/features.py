"""Four-channel input features computed from a raw gather.

Re-implements the picking toolkit's feature extraction (two AGC windows,
band-pass, local-peak mask) with the same definitions and defaults so this
package can run stand-alone; numerical agreement with the toolkit's
exported stacks is covered by tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FeatureParams:
    h1: int = 15
    h2: int = 31
    epsilon: float = 1e-8
    f_min: float = 2.0 / 1000.0
    f_max: float = 60.0 / 1000.0


def agc(amplitudes, h: int, epsilon: float):
    """Trace-wise gain: divide by trailing-window RMS (prefix before fill)."""
    a = np.asarray(amplitudes, dtype=np.float64)
    csum = np.cumsum(a**2, axis=0)
    window = csum.copy()
    if h < a.shape[0]:
        window[h:] = csum[h:] - csum[:-h]
    count = np.minimum(np.arange(1, a.shape[0] + 1), h)[:, None]
    return a / (np.sqrt(window / count) + epsilon)


def bandpass(amplitudes, f_min: float, f_max: float):
    """Mute Fourier bins outside [f_min, f_max] along the depth axis."""
    a = np.asarray(amplitudes, dtype=np.float64)
    spec = np.fft.rfft(a, axis=0)
    freqs = np.fft.rfftfreq(a.shape[0], d=1.0)
    spec[(freqs < f_min) | (freqs > f_max), :] = 0.0
    return np.fft.irfft(spec, n=a.shape[0], axis=0)


def peaks(amplitudes):
    """Strict local maxima along depth within each trace; borders 0."""
    a = np.asarray(amplitudes)
    mask = np.zeros(a.shape, dtype=np.float64)
    if a.shape[0] >= 3:
        mask[1:-1] = ((a[1:-1] > a[:-2]) & (a[1:-1] > a[2:])).astype(np.float64)
    return mask


def feature_tensor(amplitudes, params: FeatureParams = FeatureParams()):
    """(4, H, W) float32 stack: [agc(h1), agc(h2), bandpass, peaks]."""
    a = np.asarray(amplitudes, dtype=np.float64)
    stack = np.stack([
        agc(a, params.h1, params.epsilon),
        agc(a, params.h2, params.epsilon),
        bandpass(a, params.f_min, params.f_max),
        peaks(a),
    ])
    return stack.astype(np.float32)
