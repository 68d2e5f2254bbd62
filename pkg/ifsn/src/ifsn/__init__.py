"""Curvature segmentation network for common-image gathers."""

from .features import FeatureParams, feature_tensor
from .infer import infer_export, segment_gather
from .model import CBAM, NetConfig, SegNet
from .train import TrainConfig, bce_loss, load_checkpoint, miou, save_checkpoint, train

__version__ = "0.1.0"

__all__ = [
    "FeatureParams", "feature_tensor",
    "infer_export", "segment_gather",
    "CBAM", "NetConfig", "SegNet",
    "TrainConfig", "bce_loss", "load_checkpoint", "miou",
    "save_checkpoint", "train",
]
