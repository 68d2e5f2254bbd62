import numpy as np
import pytest

from rmopick.config import FeatureConfig
from rmopick.features import (
    agc_gather,
    agc_trace,
    bandpass_trace,
    feature_stack,
    peak_mask,
)
from rmopick.gridio import Gather
from rmopick.synthgen import SynthSpec, generate_gather

EPS = 1e-8


def test_agc_constant_trace_self_normalizes():
    out = agc_trace(np.full(50, 3.0), h=7, epsilon=EPS)
    assert np.max(np.abs(out - 1.0)) <= EPS / 3.0


def test_agc_zero_trace():
    assert np.all(agc_trace(np.zeros(20), h=5, epsilon=EPS) == 0.0)


def test_agc_trailing_window_values():
    out = agc_trace(np.array([1.0, 2.0, 3.0, 4.0]), h=2, epsilon=EPS)
    # trailing two-sample window; prefix mean square before it fills
    expected = [
        1.0 / (np.sqrt(1.0) + EPS),
        2.0 / (np.sqrt(2.5) + EPS),
        3.0 / (np.sqrt(6.5) + EPS),
        4.0 / (np.sqrt(12.5) + EPS),
    ]
    assert out == pytest.approx(expected, rel=1e-12)
    assert out[1] == pytest.approx(1.26491, abs=1e-5)


def test_agc_rejects_empty():
    with pytest.raises(ValueError):
        agc_trace(np.array([]), h=3, epsilon=EPS)


def test_agc_gather_matches_per_trace():
    rng = np.random.default_rng(4)
    a = rng.normal(size=(60, 7))
    full = agc_gather(a, h=9, epsilon=EPS)
    for k in range(7):
        assert full[:, k] == pytest.approx(agc_trace(a[:, k], 9, EPS))


def test_agc_scale_invariance_bound():
    # epsilon-perturbation bound; traces with near-unit window RMS
    rng = np.random.default_rng(5)
    for c in (2.0, 10.0, 0.5):
        for _ in range(50):
            x = rng.uniform(1.0, 1.1, size=int(rng.integers(5, 200)))
            h = int(rng.integers(1, 32))
            dev = np.max(np.abs(agc_trace(c * x, h, EPS) - agc_trace(x, h, EPS)))
            assert dev <= EPS * (1.0 + 1.0 / abs(c))


def test_agc_scale_invariance_generic_traces():
    rng = np.random.default_rng(6)
    for c in (2.0, 10.0, 0.5):
        for _ in range(50):
            x = rng.normal(size=100)
            dev = np.max(np.abs(agc_trace(c * x, 15, EPS) - agc_trace(x, 15, EPS)))
            assert dev <= 1e-3


def _sinusoid(n, cycles):
    return np.sin(2 * np.pi * cycles * np.arange(n) / n)


def test_bandpass_passes_in_band():
    n = 500
    x = _sinusoid(n, 10)  # f = 0.02
    y = bandpass_trace(x, 0.01, 0.05)
    assert np.max(np.abs(y - x)) <= 1e-6 * np.max(np.abs(x))


def test_bandpass_kills_out_of_band():
    n = 500
    x = _sinusoid(n, 100)  # f = 0.2
    y = bandpass_trace(x, 0.01, 0.05)
    assert np.max(np.abs(y)) < 1e-6


def test_bandpass_separates_mixture():
    n = 512
    inband = _sinusoid(n, 12)
    outband = _sinusoid(n, 200)
    y = bandpass_trace(inband + outband, 0.01, 0.05)
    assert np.max(np.abs(y - inband)) < 1e-9


def test_bandpass_idempotent():
    rng = np.random.default_rng(7)
    x = rng.normal(size=301)
    once = bandpass_trace(x, 0.002, 0.06)
    twice = bandpass_trace(once, 0.002, 0.06)
    assert np.max(np.abs(twice - once)) <= 1e-9


def test_bandpass_bad_band():
    with pytest.raises(ValueError):
        bandpass_trace(np.zeros(16), 0.3, 0.1)


def test_peak_mask_monotone_and_single_peak():
    assert np.all(peak_mask(np.arange(10.0)[:, None]) == 0)
    m = peak_mask(np.array([0.0, 1.0, 0.0])[:, None])
    assert m[:, 0].tolist() == [0, 1, 0]


def test_peak_mask_scale_invariant():
    rng = np.random.default_rng(8)
    a = rng.normal(size=(80, 6))
    scales = rng.uniform(0.1, 10.0, size=6)
    assert np.array_equal(peak_mask(a), peak_mask(a * scales))


def test_peaks_near_labels_on_clean_synthetic():
    # events separated far beyond the wavelet support, so crests stay put
    spec = SynthSpec(k_c=4, d_max=800, n_depth=1000, n_offset=60,
                     f_start=0.06, f_end=0.03, noise_frac=0.0, seed=3)
    gather, mask, _ = generate_gather(spec)
    peaks = peak_mask(gather.amplitudes)
    rows, cols = np.nonzero(mask.values)
    for r, c in zip(rows, cols):
        lo, hi = max(r - 1, 0), min(r + 2, gather.n_depth)
        assert peaks[lo:hi, c].any()


def test_feature_stack_channels():
    gather = Gather(np.zeros((32, 8)))
    stack = feature_stack(gather, FeatureConfig())
    for chan in stack.channels():
        assert np.all(chan == 0)
    cfg = FeatureConfig(h1=9, h2=9)
    rng = np.random.default_rng(9)
    gather2 = Gather(rng.normal(size=(64, 10)))
    stack2 = feature_stack(gather2, cfg)
    assert np.array_equal(stack2.agc1, stack2.agc2)


def test_feature_stack_default_params_on_synthetic():
    spec = SynthSpec(k_c=10, d_max=400, n_depth=500, n_offset=50, seed=2)
    gather, _, _ = generate_gather(spec)
    stack = feature_stack(gather, FeatureConfig())  # (h1, h2) = (15, 31)
    arr = stack.as_array()
    assert arr.shape == (4, 500, 50)
    assert np.all(np.isfinite(arr))
    assert set(np.unique(stack.peaks)) <= {0, 1}


def test_feature_config_invariants():
    with pytest.raises(ValueError):
        FeatureConfig(h1=0)
    with pytest.raises(ValueError):
        FeatureConfig(epsilon=0.0)
    with pytest.raises(ValueError):
        FeatureConfig(f_min=0.2, f_max=0.1)
