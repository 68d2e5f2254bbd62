"""Pipeline configuration: per-stage parameter groups and dataset presets.

Config files are flat `key=value` text; every leaf field name is unique
across the groups, so a flat file maps onto the nested dataclasses without
qualification.  CLI flags override file values.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace


@dataclass(frozen=True)
class FeatureConfig:
    """Feature-stack parameters: two AGC windows, pass band, stabilizer."""

    h1: int = 15
    h2: int = 31
    epsilon: float = 1e-8
    f_min: float = 2.0 / 1000.0
    f_max: float = 60.0 / 1000.0

    def __post_init__(self):
        if self.h1 < 1 or self.h2 < 1:
            raise ValueError("AGC window lengths must be >= 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if not (0.0 <= self.f_min < self.f_max <= 0.5):
            raise ValueError("pass band must satisfy 0 <= f_min < f_max <= 0.5")


@dataclass(frozen=True)
class ClusterConfig:
    """Curve-merging parameters for the mixed slope/endpoint distance."""

    alpha: float = 0.5            # slope vs endpoint balance
    w_offset: float = 1.5         # anisotropic weight on offset differences
    w_depth: float = 1.0
    d_eps: float = 4.0            # merge radius in mixed-distance units
    n_min_pts: int = 1            # density threshold; 1 = connected components
    slope_win: int = 11           # points per local-slope window
    slope_stride: int = 5

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.d_eps <= 0:
            raise ValueError("d_eps must be > 0")
        if self.n_min_pts < 1:
            raise ValueError("n_min_pts must be >= 1")
        if self.slope_win < 2:
            raise ValueError("slope_win must be >= 2")
        if self.slope_stride < 1:
            raise ValueError("slope_stride must be >= 1")


@dataclass(frozen=True)
class RefineConfig:
    """Slope-field construction and slope-constrained local regression."""

    h_prior: float = 5.0          # slope-field kernel bandwidth (pixels)
    h_data: float = 5.0           # regression kernel bandwidth (traces)
    h_para: float = 50.0          # prior-penalty bandwidth
    lam: float = 1.0              # prior weight (lambda)
    n_min: int = 20               # minimum surviving curve length (points)
    cell_offset: int = 2          # slope-field cell footprint, offset pixels
    cell_depth: int = 10          # slope-field cell footprint, depth pixels

    def __post_init__(self):
        if min(self.h_prior, self.h_data, self.h_para) <= 0:
            raise ValueError("bandwidths must be > 0")
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if self.n_min < 1:
            raise ValueError("n_min must be >= 1")
        if self.cell_offset < 1 or self.cell_depth < 1:
            raise ValueError("slope-field cells must be >= 1 pixel")


@dataclass(frozen=True)
class MetricConfig:
    """Evaluation parameters: semblance half-window and tracking threshold."""

    h_s: int = 5                  # semblance half-window (depth samples)
    d_t: float = 3.0              # tracking threshold (pixels)

    def __post_init__(self):
        if self.h_s < 0:
            raise ValueError("h_s must be >= 0")
        if self.d_t <= 0:
            raise ValueError("d_t must be > 0")


@dataclass(frozen=True)
class PipelineConfig:
    """All inference hyperparameters of the picking cascade."""

    features: FeatureConfig = field(default_factory=FeatureConfig)
    t_seg: float = 0.5            # segmentation binarization threshold
    cluster: ClusterConfig = field(default_factory=ClusterConfig)
    refine: RefineConfig = field(default_factory=RefineConfig)
    metric: MetricConfig = field(default_factory=MetricConfig)

    def __post_init__(self):
        if not 0.0 < self.t_seg < 1.0:
            raise ValueError("t_seg must lie in (0, 1)")

    def flat(self) -> dict:
        """Flatten to the key=value leaf names used by config files."""
        out = {"t_seg": self.t_seg}
        for group in (self.features, self.cluster, self.refine, self.metric):
            for f in fields(group):
                out[f.name] = getattr(group, f.name)
        return out


# Named per-dataset hyperparameter presets.  Remaining fields keep defaults.
PRESETS = {
    "bp": dict(h1=9, h2=15, n_min_pts=1, d_eps=8.0,
               h_prior=5.0, h_data=5.0, h_para=50.0, n_min=20),
    "fa": dict(h1=15, h2=31, n_min_pts=1, d_eps=8.0,
               h_prior=5.0, h_data=5.0, h_para=50.0, n_min=20),
    "fb": dict(h1=15, h2=31, n_min_pts=1, d_eps=4.0,
               h_prior=5.0, h_data=5.0, h_para=50.0, n_min=10),
}

_INT_KEYS = {"h1", "h2", "n_min_pts", "slope_win", "slope_stride", "n_min",
             "cell_offset", "cell_depth", "h_s"}
_KEY_ALIASES = {"lambda": "lam"}


def config_from_flat(entries: dict, base: PipelineConfig | None = None) -> PipelineConfig:
    """Build a PipelineConfig from flat key=value entries over a base config."""
    cfg = base if base is not None else PipelineConfig()
    groups = {
        "features": dict(), "cluster": dict(), "refine": dict(), "metric": dict(),
    }
    names = {
        "features": {f.name for f in fields(FeatureConfig)},
        "cluster": {f.name for f in fields(ClusterConfig)},
        "refine": {f.name for f in fields(RefineConfig)},
        "metric": {f.name for f in fields(MetricConfig)},
    }
    t_seg = cfg.t_seg
    for raw_key, value in entries.items():
        key = _KEY_ALIASES.get(raw_key, raw_key)
        if key == "t_seg":
            t_seg = float(value)
            continue
        for group, group_names in names.items():
            if key in group_names:
                groups[group][key] = int(value) if key in _INT_KEYS else float(value)
                break
        else:
            raise KeyError(f"unknown config key {raw_key!r}")
    return PipelineConfig(
        features=replace(cfg.features, **groups["features"]),
        t_seg=t_seg,
        cluster=replace(cfg.cluster, **groups["cluster"]),
        refine=replace(cfg.refine, **groups["refine"]),
        metric=replace(cfg.metric, **groups["metric"]),
    )


def preset_config(name: str) -> PipelineConfig:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return config_from_flat(PRESETS[name])


def load_config_file(path, base: PipelineConfig | None = None) -> PipelineConfig:
    """Parse a flat key=value config file ('#' comments, blank lines ok)."""
    entries = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            entries[key.strip()] = value.strip()
    return config_from_flat(entries, base)
