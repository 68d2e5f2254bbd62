"""Synthetic labeled CIG generation.

Each gather carries a stack of residual-moveout events whose depth follows

    z(o) = sqrt(z0^2 + beta * o^2 + gamma * o^4)

with zero-offset depths laid out on a randomized ladder and (beta, gamma)
drawn from depth-dependent boxes.  Events are rendered with a Ricker wavelet
whose frequency ramps down with depth, far-offset points of shallow events
are cropped away, and uniform noise is injected at a fixed power fraction.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .gridio import Curve, Gather, write_curves, write_raster

# (beta_lo, beta_hi), (gamma_lo, gamma_hi) per vertical part, top to bottom.
# The deepest part reuses the shallow box.
PARAM_ROWS = (
    ((0.275, 1.125), (2.75e-4, 6.25e-4)),
    ((0.125, 0.50), (2.00e-4, 3.75e-4)),
    ((-0.50, 0.125), (-2.50e-4, -1.25e-4)),
    ((0.275, 1.125), (2.75e-4, 6.25e-4)),
)


@dataclass(frozen=True)
class CurveParams:
    """Shape of one synthetic event."""

    z0: float       # zero-offset depth, samples
    beta: float     # quadratic moveout coefficient
    gamma: float    # quartic moveout coefficient

    def __post_init__(self):
        if self.z0 <= 0:
            raise ValueError("z0 must be > 0")


@dataclass(frozen=True)
class LabelMask:
    """Binary raster marking ground-truth curvature pixels."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2:
            raise ValueError("label mask must be 2-D")
        if not np.isin(v, (0, 1)).all():
            raise ValueError("label mask values must be 0 or 1")
        v = np.ascontiguousarray(v.astype(np.uint8))
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def save(self, path) -> None:
        write_raster(self.values.astype(np.float32), path)


@dataclass(frozen=True)
class SynthSpec:
    """All randomized parameters of one synthetic gather."""

    k_c: int = 60                 # number of events
    d_max: int = 1000             # ladder extent, depth samples
    n_depth: int = 1000
    n_offset: int = 100
    r_c: float = 0.04             # cropping rate
    o_0: float | None = None      # cropping intercept; default 0.35 * n_offset
    f_start: float = 16.0 / 1000.0  # wavelet frequency at depth 0, per sample
    f_end: float = 4.0 / 1000.0     # wavelet frequency at d_max
    noise_frac: float = 0.05      # noise power / signal power
    seed: int = 0
    ladder_jitter: float = 0.0125  # half-width of the per-event ladder noise

    def __post_init__(self):
        if self.k_c < 1:
            raise ValueError("k_c must be >= 1")
        if self.d_max > self.n_depth:
            raise ValueError("d_max must not exceed n_depth")
        if not (self.f_start >= self.f_end > 0):
            raise ValueError("need f_start >= f_end > 0")
        if not (0.0 <= self.noise_frac < 1.0):
            raise ValueError("noise_frac must lie in [0, 1)")
        if self.o_0 is None:
            # tight enough that intersecting far-offset portions get cropped
            object.__setattr__(self, "o_0", 0.35 * self.n_offset)


def initial_depths(k_c: int, d_max: float, rng, ladder_jitter: float = 0.0125):
    """Zero-offset depths on a randomized ladder.

    One shared base depth is drawn from U(10, 200); each rung k = 1..k_c sits
    at base + (d_max / k_c + eps_k) * k with independent eps_k drawn from
    U(-ladder_jitter, +ladder_jitter).  The top rungs may exceed the raster;
    rendering drops out-of-bounds points later.
    """
    if k_c < 1:
        raise ValueError("k_c must be >= 1")
    base = rng.uniform(10.0, 200.0)
    eps = rng.uniform(-ladder_jitter, ladder_jitter, size=k_c)
    k = np.arange(1, k_c + 1, dtype=np.float64)
    return base + (d_max / k_c + eps) * k


def param_row(k: int, k_c: int) -> int:
    """Vertical part index (0..3) of event k; boundaries floor to integers."""
    if not 1 <= k <= k_c:
        raise ValueError(f"event index {k} outside 1..{k_c}")
    b1, b2, b3 = k_c // 3, k_c // 2, (2 * k_c) // 3
    if k < b1:
        return 0
    if k < b2:
        return 1
    if k < b3:
        return 2
    return 3


def sample_curve_params(k: int, k_c: int, rng) -> tuple[float, float]:
    """Draw (beta, gamma) uniformly from the box of event k's vertical part."""
    (b_lo, b_hi), (g_lo, g_hi) = PARAM_ROWS[param_row(k, k_c)]
    beta = rng.uniform(b_lo, b_hi)
    gamma = rng.uniform(g_lo, g_hi)
    return beta, gamma


def curve_depths(params: CurveParams, offsets):
    """Evaluate the event depth at each offset; drops non-positive radicands."""
    o = np.asarray(offsets, dtype=np.float64)
    radicand = params.z0**2 + params.beta * o**2 + params.gamma * o**4
    keep = radicand > 0
    return o[keep], np.sqrt(radicand[keep])


def crop_points(offsets, depths, r_c: float, o_0: float):
    """Drop far-offset points: keep (o, z) only where o <= z * r_c + o_0."""
    o = np.asarray(offsets, dtype=np.float64)
    z = np.asarray(depths, dtype=np.float64)
    keep = o <= z * r_c + o_0
    return o[keep], z[keep]


def _bound_points(offsets, depths, n_depth: int):
    """Keep points whose rounded depth lands inside the raster."""
    rows = np.rint(depths).astype(np.int64)
    keep = (rows >= 0) & (rows < n_depth)
    return offsets[keep], depths[keep]


def render_gather(point_sets, spec: SynthSpec, rng=None):
    """Render cropped event points into (Gather, LabelMask).

    Each point contributes a Ricker wavelet along its column,
    (1 - 2h) * exp(-h) with h = (pi * (z - z_c) * f)^2, where f ramps
    linearly from f_start at depth 0 to f_end at d_max (clamped below).
    Uniform noise with power noise_frac * mean signal power is added when
    noise_frac > 0 (requires rng).
    """
    amp = np.zeros((spec.n_depth, spec.n_offset), dtype=np.float64)
    mask = np.zeros((spec.n_depth, spec.n_offset), dtype=np.uint8)
    z_grid = np.arange(spec.n_depth, dtype=np.float64)

    cols: list[list[tuple[float, float]]] = [[] for _ in range(spec.n_offset)]
    for offsets, depths in point_sets:
        offsets, depths = _bound_points(
            np.asarray(offsets, dtype=np.float64),
            np.asarray(depths, dtype=np.float64),
            spec.n_depth,
        )
        ramp = np.clip(depths / spec.d_max, 0.0, 1.0)
        freqs = spec.f_start + (spec.f_end - spec.f_start) * ramp
        for o, z, f in zip(offsets, depths, freqs):
            col = int(o)
            if 0 <= col < spec.n_offset:
                cols[col].append((z, f))
                mask[int(np.rint(z)), col] = 1

    for col, pts in enumerate(cols):
        if not pts:
            continue
        z_c = np.array([p[0] for p in pts])
        f = np.array([p[1] for p in pts])
        h = (np.pi * (z_grid[:, None] - z_c[None, :]) * f[None, :]) ** 2
        amp[:, col] = ((1.0 - 2.0 * h) * np.exp(-h)).sum(axis=1)

    if spec.noise_frac > 0:
        if rng is None:
            raise ValueError("noise injection requires an rng")
        power = float(np.mean(amp**2))
        a = np.sqrt(3.0 * spec.noise_frac * power)
        amp = amp + rng.uniform(-a, a, size=amp.shape)

    return Gather(amp.astype(np.float32)), LabelMask(mask)


def generate_gather(spec: SynthSpec, rng=None):
    """Draw one labeled gather: returns (Gather, LabelMask, truth curves)."""
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    z0s = initial_depths(spec.k_c, spec.d_max, rng, spec.ladder_jitter)
    offsets = np.arange(spec.n_offset, dtype=np.float64)
    point_sets = []
    truth = []
    for k, z0 in enumerate(z0s, start=1):
        beta, gamma = sample_curve_params(k, spec.k_c, rng)
        o, z = curve_depths(CurveParams(z0, beta, gamma), offsets)
        o, z = crop_points(o, z, spec.r_c, spec.o_0)
        o, z = _bound_points(o, z, spec.n_depth)
        point_sets.append((o, z))
        if o.size:
            truth.append(Curve(o.astype(np.int64), z.astype(np.float32)))
    gather, mask = render_gather(point_sets, spec, rng)
    return gather, mask, truth


def sample_stem(index: int) -> str:
    return f"cig_{index:05d}"


def generate_dataset(template: SynthSpec, counts: dict[int, int], out_dir,
                     write_truth: bool = True) -> dict:
    """Generate a labeled dataset and write a JSON manifest.

    `counts` maps event count -> number of gathers.  Every gather gets an
    independent RNG stream spawned from the template seed, so regeneration
    is byte-identical regardless of ordering or parallelism.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    samples = []
    index = 0
    for k_c in sorted(counts):
        for _ in range(counts[k_c]):
            spec = replace(template, k_c=k_c)
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=template.seed, spawn_key=(index,))
            )
            gather, mask, truth = generate_gather(spec, rng)
            stem = sample_stem(index)
            gather.save(out / f"{stem}.cigr")
            mask.save(out / f"{stem}_mask.cigr")
            record = {
                "index": index,
                "k_c": k_c,
                "gather": f"{stem}.cigr",
                "mask": f"{stem}_mask.cigr",
            }
            if write_truth:
                write_curves(truth, out / f"{stem}_truth.csv")
                record["truth"] = f"{stem}_truth.csv"
            samples.append(record)
            index += 1
    manifest = {"seed": template.seed, "spec": asdict(template), "samples": samples}
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest


def load_manifest(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
