"""Export segmentation maps for gathers as CIGR rasters."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch

from .cigr import read_raster, write_raster
from .features import FeatureParams, feature_tensor


def segment_gather(net, amplitudes, params: FeatureParams = FeatureParams()):
    """Probability map for one gather, clamped to [0, 1]."""
    x = torch.from_numpy(feature_tensor(amplitudes, params)).unsqueeze(0)
    with torch.no_grad():
        pred = net(x).squeeze(0).numpy()
    return np.clip(pred, 0.0, 1.0).astype(np.float32)


def infer_export(net, gather_paths, out_dir,
                 params: FeatureParams = FeatureParams()) -> list:
    """Write `<stem>_seg.cigr` per gather; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for path in gather_paths:
        path = Path(path)
        amps = read_raster(path)
        seg = segment_gather(net, amps, params)
        out_path = out_dir / (path.stem + "_seg.cigr")
        write_raster(seg, out_path)
        written.append(out_path)
    return written
