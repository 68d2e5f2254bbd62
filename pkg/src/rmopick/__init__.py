"""Residual-moveout picking toolkit.

Batch pipeline for common-image-gather processing: synthetic labeled gather
generation, feature extraction, pluggable segmentation, contour / cluster /
regression post-processing, and pick-quality metrics.
"""

from .config import (
    ClusterConfig,
    FeatureConfig,
    MetricConfig,
    PipelineConfig,
    RefineConfig,
    config_from_flat,
    load_config_file,
    preset_config,
)
from .gridio import (
    Curve,
    Gather,
    GridIOError,
    SegMap,
    SlopeField,
    read_curves,
    read_raster,
    write_curves,
    write_raster,
)
from .synthgen import LabelMask, SynthSpec, generate_dataset, generate_gather
from .features import FeatureStack, feature_stack
from .segmenters import segment_baseline, segment_oracle, load_segmentation
from .extract import extract_all
from .cluster import cluster_curves, curve_distance, merge_group
from .refine import pick_pipeline, pick_stages, refine_curve, slope_field
from .metrics import curve_error, semblance, slope_mse, track_rate

__version__ = "0.1.0"

__all__ = [
    "ClusterConfig", "FeatureConfig", "MetricConfig", "PipelineConfig",
    "RefineConfig", "config_from_flat", "load_config_file", "preset_config",
    "Curve", "Gather", "GridIOError", "SegMap", "SlopeField",
    "read_curves", "read_raster", "write_curves", "write_raster",
    "LabelMask", "SynthSpec", "generate_dataset", "generate_gather",
    "FeatureStack", "feature_stack",
    "segment_baseline", "segment_oracle", "load_segmentation",
    "extract_all", "cluster_curves", "curve_distance", "merge_group",
    "pick_pipeline", "pick_stages", "refine_curve", "slope_field",
    "curve_error", "semblance", "slope_mse", "track_rate",
]
